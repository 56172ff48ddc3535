"""JSON problem documents: parsing, validation and canonical rendering.

Three kinds of document exist, told apart by the top-level ``"kind"`` key:

``schedule``
    workers, firms and days with one spec per agent (see :class:`AgentSpec`).
``hours``
    worker/firm rankings with per-pair hour caps, expanded into hour slots.
``raw``
    contract labels plus two choice maps, each a quota rule or a full table;
    an optional ``"maps"`` object holds further named maps for ``classify``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Union

from .choicemaps import (
    QuotaChoiceSpec,
    TableChoiceSpec,
    build_quota_choice,
    build_table_choice,
)
from .core import ChoiceFunction, ContractUniverse, SchedMatchError, SpecError
from .schedule import (
    AgentSpec,
    CompiledMarket,
    HoursEncoding,
    ScheduleProblem,
    build_market,
    expand_hours,
)


class ProblemParseError(SchedMatchError, ValueError):
    pass


@dataclass(frozen=True)
class QuotaMapDoc:
    preference: tuple[str, ...]
    q: int | None = None
    groups: tuple[tuple[tuple[str, ...], int], ...] = ()
    allow_overlap: bool = False


@dataclass(frozen=True)
class TableMapDoc:
    # (offered, chosen) pairs, one per subset, in canonical order
    entries: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]


MapDoc = Union[QuotaMapDoc, TableMapDoc]


@dataclass(frozen=True)
class ScheduleDocument:
    problem: ScheduleProblem
    description: str = ""


@dataclass(frozen=True)
class HoursDocument:
    encoding: HoursEncoding
    description: str = ""


@dataclass(frozen=True)
class RawDocument:
    labels: tuple[str, ...]
    worker_choice: MapDoc
    firm_choice: MapDoc
    maps: Mapping[str, MapDoc] = field(default_factory=dict)
    description: str = ""


ProblemDocument = Union[ScheduleDocument, HoursDocument, RawDocument]


@dataclass
class Market:
    """A document compiled into its two choice maps."""

    universe: ContractUniverse
    worker_choice: ChoiceFunction
    firm_choice: ChoiceFunction
    maps: dict[str, ChoiceFunction]
    compiled: CompiledMarket | None = None
    hours: HoursEncoding | None = None


# ------------------------------------------------------------------ parsing


def _fail(path: str, msg: str) -> ProblemParseError:
    return ProblemParseError(f"{path}: {msg}" if path else msg)


def _get(obj: Mapping, key: str, path: str, kind: type | tuple, default: Any = ...) -> Any:
    if key not in obj:
        if default is ...:
            raise _fail(path, f"missing field {key!r}")
        return default
    value = obj[key]
    sub = f"{path}.{key}" if path else key
    if kind is int and isinstance(value, bool):
        raise _fail(sub, "expected an integer")
    if not isinstance(value, kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise _fail(sub, f"expected {names}, got {type(value).__name__}")
    return value


def _quota(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, "quota must be an integer")
    if value < 0:
        raise _fail(path, "quota must be >= 0")
    return value


def _ids(obj: Mapping, key: str, path: str) -> tuple[str, ...]:
    values = _get(obj, key, path, list)
    for i, v in enumerate(values):
        if not isinstance(v, str):
            raise _fail(f"{path}.{key}[{i}]" if path else f"{key}[{i}]", "expected a string id")
    return tuple(values)


def _quota_map(obj: Mapping, path: str) -> dict[str, int]:
    out = {}
    for k, v in obj.items():
        out[k] = _quota(v, f"{path}.{k}")
    return out


def _agent(obj: Any, path: str) -> AgentSpec:
    if not isinstance(obj, dict):
        raise _fail(path, "expected an object")
    known = {"preference", "quota", "day_quotas", "counterpart_quotas", "allow_overlap"}
    extra = set(obj) - known
    if extra:
        raise _fail(path, f"unknown field {sorted(extra)[0]!r}")
    pref = []
    for i, entry in enumerate(_get(obj, "preference", path, list)):
        if not (isinstance(entry, list) and len(entry) == 2 and all(isinstance(x, str) for x in entry)):
            raise _fail(f"{path}.preference[{i}]", "expected a [counterpart, day] pair")
        pref.append(tuple(entry))
    quota = obj.get("quota")
    if quota is not None:
        quota = _quota(quota, f"{path}.quota")
    return AgentSpec(
        tuple(pref),
        quota,
        _quota_map(_get(obj, "day_quotas", path, dict, {}), f"{path}.day_quotas"),
        _quota_map(_get(obj, "counterpart_quotas", path, dict, {}), f"{path}.counterpart_quotas"),
        _get(obj, "allow_overlap", path, bool, False),
    )


def _schedule(doc: Mapping) -> ScheduleDocument:
    workers, firms, days = (_ids(doc, k, "") for k in ("workers", "firms", "days"))
    specs = {}
    for side, agents in (("worker_specs", workers), ("firm_specs", firms)):
        raw = _get(doc, side, "", dict)
        missing = [a for a in agents if a not in raw]
        if missing:
            raise _fail(side, f"no spec for {missing[0]}")
        specs[side] = {a: _agent(v, f"{side}.{a}") for a, v in raw.items()}
    contracts = None
    if "contracts" in doc:
        contracts = []
        for i, c in enumerate(_get(doc, "contracts", "", list)):
            if not (isinstance(c, list) and len(c) == 3 and all(isinstance(x, str) for x in c)):
                raise _fail(f"contracts[{i}]", "expected a [worker, firm, day] triple")
            contracts.append(tuple(c))
        contracts = tuple(contracts)
    try:
        problem = ScheduleProblem(
            workers, firms, days, specs["worker_specs"], specs["firm_specs"], contracts
        )
    except SpecError as exc:
        raise ProblemParseError(str(exc)) from None
    return ScheduleDocument(problem, _get(doc, "description", "", str, ""))


def _hours(doc: Mapping) -> HoursDocument:
    workers, firms = _ids(doc, "workers", ""), _ids(doc, "firms", "")

    def rankings(key):
        raw = _get(doc, key, "", dict)
        return {a: _ids(raw, a, key) for a in raw}

    def caps(key, worker_first):
        out = {}
        for agent, row in _get(doc, key, "", dict).items():
            if not isinstance(row, dict):
                raise _fail(f"{key}.{agent}", "expected an object")
            for other, q in row.items():
                pair = (agent, other) if worker_first else (other, agent)
                out[pair] = _quota(q, f"{key}.{agent}.{other}")
        return out

    try:
        enc = HoursEncoding(
            workers,
            firms,
            rankings("worker_rankings"),
            rankings("firm_rankings"),
            caps("worker_caps", True),
            caps("firm_caps", False),
            _quota_map(_get(doc, "worker_totals", "", dict, {}), "worker_totals"),
            _quota_map(_get(doc, "firm_totals", "", dict, {}), "firm_totals"),
        )
    except SpecError as exc:
        raise ProblemParseError(str(exc)) from None
    return HoursDocument(enc, _get(doc, "description", "", str, ""))


def _split(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _map_doc(obj: Any, path: str, labels: tuple[str, ...]) -> MapDoc:
    if not isinstance(obj, dict):
        raise _fail(path, "expected an object")
    known = set(labels)
    kind = _get(obj, "type", path, str)

    def check(names, where):
        for x in names:
            if x not in known:
                raise _fail(where, f"unknown contract {x!r}")

    if kind == "quota":
        pref = _ids(obj, "preference", path)
        check(pref, f"{path}.preference")
        if len(set(pref)) != len(pref):
            dup = next(x for x in pref if pref.count(x) > 1)
            raise _fail(f"{path}.preference", f"duplicate preference entry {dup}")
        q = obj.get("q")
        if q is not None:
            q = _quota(q, f"{path}.q")
        groups = []
        for i, g in enumerate(_get(obj, "groups", path, list, [])):
            where = f"{path}.groups[{i}]"
            if not isinstance(g, dict):
                raise _fail(where, "expected an object")
            members = _ids(g, "members", where)
            check(members, f"{where}.members")
            groups.append((_canonical(members, labels), _quota(_get(g, "q", where, int), f"{where}.q")))
        return QuotaMapDoc(pref, q, tuple(groups), _get(obj, "allow_overlap", path, bool, False))
    if kind == "table":
        entries = {}
        for key, value in _get(obj, "entries", path, dict).items():
            where = f"{path}.entries[{key!r}]"
            if not isinstance(value, str):
                raise _fail(where, "expected a comma-separated subset")
            a, c = _split(key), _split(value)
            check(a, where)
            check(c, where)
            entries[_mask(a, labels)] = (_canonical(a, labels), _canonical(c, labels))
        return TableMapDoc(tuple(entries[k] for k in sorted(entries)))
    raise _fail(f"{path}.type", f"unknown choice map type {kind!r}")


def _canonical(names, labels) -> tuple[str, ...]:
    chosen = set(names)
    return tuple(x for x in labels if x in chosen)


def _mask(names, labels) -> int:
    index = {x: i for i, x in enumerate(labels)}
    return sum(1 << index[x] for x in set(names))


def _raw(doc: Mapping) -> RawDocument:
    labels = _ids(doc, "labels", "")
    if len(set(labels)) != len(labels):
        dup = next(x for x in labels if labels.count(x) > 1)
        raise _fail("labels", f"duplicate label {dup}")
    maps = {
        name: _map_doc(m, f"maps.{name}", labels)
        for name, m in _get(doc, "maps", "", dict, {}).items()
    }
    return RawDocument(
        labels,
        _map_doc(_get(doc, "worker_choice", "", dict), "worker_choice", labels),
        _map_doc(_get(doc, "firm_choice", "", dict), "firm_choice", labels),
        maps,
        _get(doc, "description", "", str, ""),
    )


def parse_problem(text: str) -> ProblemDocument:
    """Parse and validate a JSON problem document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ProblemParseError("top level must be a JSON object")
    kind = _get(doc, "kind", "", str)
    if kind == "schedule":
        return _schedule(doc)
    if kind == "hours":
        return _hours(doc)
    if kind == "raw":
        return _raw(doc)
    raise _fail("kind", f"unknown document kind {kind!r} (expected schedule, hours or raw)")


# ---------------------------------------------------------------- rendering


def _agent_json(spec: AgentSpec) -> dict:
    out: dict[str, Any] = {"preference": [list(p) for p in spec.preference]}
    if spec.quota is not None:
        out["quota"] = spec.quota
    if spec.day_quotas:
        out["day_quotas"] = dict(spec.day_quotas)
    if spec.counterpart_quotas:
        out["counterpart_quotas"] = dict(spec.counterpart_quotas)
    if spec.allow_overlap:
        out["allow_overlap"] = True
    return out


def _map_json(m: MapDoc) -> dict:
    if isinstance(m, QuotaMapDoc):
        out: dict[str, Any] = {"type": "quota", "preference": list(m.preference)}
        if m.q is not None:
            out["q"] = m.q
        if m.groups:
            out["groups"] = [{"members": list(g), "q": q} for g, q in m.groups]
        if m.allow_overlap:
            out["allow_overlap"] = True
        return out
    return {"type": "table", "entries": {",".join(a): ",".join(c) for a, c in m.entries}}


def problem_to_json(doc: ProblemDocument) -> dict:
    if isinstance(doc, ScheduleDocument):
        p = doc.problem
        out: dict[str, Any] = {"kind": "schedule"}
        if doc.description:
            out["description"] = doc.description
        out.update(
            workers=list(p.workers),
            firms=list(p.firms),
            days=list(p.days),
            worker_specs={a: _agent_json(s) for a, s in p.worker_specs.items()},
            firm_specs={a: _agent_json(s) for a, s in p.firm_specs.items()},
        )
        if p.contracts is not None:
            out["contracts"] = [list(c) for c in p.contracts]
        return out
    if isinstance(doc, HoursDocument):
        e = doc.encoding
        out = {"kind": "hours"}
        if doc.description:
            out["description"] = doc.description
        worker_caps: dict[str, dict[str, int]] = {}
        for (w, f), q in e.worker_caps.items():
            worker_caps.setdefault(w, {})[f] = q
        firm_caps: dict[str, dict[str, int]] = {}
        for (w, f), q in e.firm_caps.items():
            firm_caps.setdefault(f, {})[w] = q
        out.update(
            workers=list(e.workers),
            firms=list(e.firms),
            worker_rankings={a: list(r) for a, r in e.worker_rankings.items()},
            firm_rankings={a: list(r) for a, r in e.firm_rankings.items()},
            worker_caps=worker_caps,
            firm_caps=firm_caps,
        )
        if e.worker_totals:
            out["worker_totals"] = dict(e.worker_totals)
        if e.firm_totals:
            out["firm_totals"] = dict(e.firm_totals)
        return out
    out = {"kind": "raw"}
    if doc.description:
        out["description"] = doc.description
    out.update(
        labels=list(doc.labels),
        worker_choice=_map_json(doc.worker_choice),
        firm_choice=_map_json(doc.firm_choice),
    )
    if doc.maps:
        out["maps"] = {k: _map_json(m) for k, m in doc.maps.items()}
    return out


def render_problem(doc: ProblemDocument) -> str:
    return json.dumps(problem_to_json(doc), indent=2) + "\n"


# ---------------------------------------------------------------- compiling


def build_map(m: MapDoc, universe: ContractUniverse, name: str) -> ChoiceFunction:
    if isinstance(m, QuotaMapDoc):
        spec = QuotaChoiceSpec.from_labels(universe, m.preference, m.q, m.groups)
        return build_quota_choice(spec, m.allow_overlap, name=name)
    table = {universe.set(a): universe.set(c) for a, c in m.entries}
    return build_table_choice(TableChoiceSpec(universe, table), name=name)


def compile_document(doc: ProblemDocument) -> Market:
    if isinstance(doc, RawDocument):
        u = ContractUniverse(doc.labels)
        maps = {name: build_map(m, u, name) for name, m in doc.maps.items()}
        return Market(u, build_map(doc.worker_choice, u, "C_W"), build_map(doc.firm_choice, u, "C_F"), maps)
    if isinstance(doc, HoursDocument):
        compiled = build_market(expand_hours(doc.encoding))
        hours = doc.encoding
    else:
        compiled = build_market(doc.problem)
        hours = None
    return Market(
        compiled.universe, compiled.worker_choice, compiled.firm_choice, {}, compiled, hours
    )


# ------------------------------------------------------------------ corpus


def corpus_names() -> list[str]:
    root = resources.files("schedmatch") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def corpus_text(name: str) -> str:
    path = resources.files("schedmatch") / "corpus" / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled problem named {name!r}")
    return path.read_text(encoding="utf-8")


def load_problem(source: str | Path) -> ProblemDocument:
    """Parse a problem from a file path or the name of a bundled problem."""
    path = Path(source)
    if path.is_file():
        return parse_problem(path.read_text(encoding="utf-8"))
    return parse_problem(corpus_text(str(source)))


__all__ = [
    "HoursDocument",
    "Market",
    "ProblemDocument",
    "ProblemParseError",
    "QuotaMapDoc",
    "RawDocument",
    "ScheduleDocument",
    "TableMapDoc",
    "build_map",
    "compile_document",
    "corpus_names",
    "corpus_text",
    "load_problem",
    "parse_problem",
    "problem_to_json",
    "render_problem",
]
