"""Worker/firm/day markets compiled into quota choice maps.

A contract is a triple ``(worker, firm, day)``. Each agent lists the
counterpart/day pairs it accepts in strict preference order and may cap its
total, its load per day and its load per counterpart. Agents compile to greedy
quota rules, and each side's rules are combined over the partition of the
contracts by agent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .choicemaps import (
    QuotaChoiceSpec,
    build_quota_choice,
    combine_partition,
    effective_groups,
)
from .core import ChoiceFunction, ContractSet, ContractUniverse, SpecError

Triple = tuple[str, str, str]
WORKER = "worker"
FIRM = "firm"


def contract_label(worker: str, firm: str, day: str) -> str:
    return f"({worker},{firm},{day})"


@dataclass(frozen=True)
class AgentSpec:
    """One agent's requirements.

    ``preference`` lists ``(counterpart, day)`` pairs, best first; anything
    missing is unacceptable. ``quota=None`` leaves the total uncapped.
    """

    preference: tuple[tuple[str, str], ...] = ()
    quota: int | None = None
    day_quotas: Mapping[str, int] = field(default_factory=dict)
    counterpart_quotas: Mapping[str, int] = field(default_factory=dict)
    allow_overlap: bool = False

    def __post_init__(self):
        object.__setattr__(self, "preference", tuple(tuple(p) for p in self.preference))
        object.__setattr__(self, "day_quotas", dict(self.day_quotas))
        object.__setattr__(self, "counterpart_quotas", dict(self.counterpart_quotas))


@dataclass(frozen=True)
class ScheduleProblem:
    workers: tuple[str, ...]
    firms: tuple[str, ...]
    days: tuple[str, ...]
    worker_specs: Mapping[str, AgentSpec] = field(default_factory=dict)
    firm_specs: Mapping[str, AgentSpec] = field(default_factory=dict)
    # Restricts the contract universe; None means every (worker, firm, day).
    contracts: tuple[Triple, ...] | None = None

    def __post_init__(self):
        for name in ("workers", "firms", "days"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "worker_specs", dict(self.worker_specs))
        object.__setattr__(self, "firm_specs", dict(self.firm_specs))
        if self.contracts is not None:
            object.__setattr__(self, "contracts", tuple(tuple(c) for c in self.contracts))
        self.validate()

    def validate(self) -> None:
        for name in ("workers", "firms", "days"):
            ids = getattr(self, name)
            if len(set(ids)) != len(ids):
                dup = next(x for x in ids if ids.count(x) > 1)
                raise SpecError(f"{name}: duplicate id {dup}")
        allowed = None if self.contracts is None else set(self.contracts)
        if allowed is not None:
            for c in self.contracts:
                w, f, d = c
                if w not in self.workers or f not in self.firms or d not in self.days:
                    raise SpecError(f"contracts: {contract_label(*c)} uses an undeclared id")
        sides = (
            ("worker_specs", self.workers, self.worker_specs, self.firms, "firm"),
            ("firm_specs", self.firms, self.firm_specs, self.workers, "worker"),
        )
        for path, agents, specs, counterparts, ckind in sides:
            for agent, spec in specs.items():
                where = f"{path}.{agent}"
                if agent not in agents:
                    raise SpecError(f"{where}: unknown agent {agent}")
                seen = set()
                for k, (other, day) in enumerate(spec.preference):
                    if other not in counterparts:
                        raise SpecError(f"{where}.preference[{k}]: unknown {ckind} {other}")
                    if day not in self.days:
                        raise SpecError(f"{where}.preference[{k}]: unknown day {day}")
                    if (other, day) in seen:
                        raise SpecError(f"{where}.preference[{k}]: duplicate entry ({other},{day})")
                    seen.add((other, day))
                    if allowed is not None and self._triple(path, agent, other, day) not in allowed:
                        raise SpecError(f"{where}.preference[{k}]: ({other},{day}) is not a contract")
                if spec.quota is not None and spec.quota < 0:
                    raise SpecError(f"{where}.quota: quota must be >= 0")
                for day, q in spec.day_quotas.items():
                    if day not in self.days:
                        raise SpecError(f"{where}.day_quotas: unknown day {day}")
                    if q < 0:
                        raise SpecError(f"{where}.day_quotas.{day}: quota must be >= 0")
                for other, q in spec.counterpart_quotas.items():
                    if other not in counterparts:
                        raise SpecError(f"{where}.counterpart_quotas: unknown {ckind} {other}")
                    if q < 0:
                        raise SpecError(f"{where}.counterpart_quotas.{other}: quota must be >= 0")

    @staticmethod
    def _triple(path: str, agent: str, other: str, day: str) -> Triple:
        return (agent, other, day) if path == "worker_specs" else (other, agent, day)

    def triples(self) -> list[Triple]:
        """Contracts in (worker, firm, day) order of declaration."""
        if self.contracts is None:
            return [(w, f, d) for w in self.workers for f in self.firms for d in self.days]
        rank = (
            {w: i for i, w in enumerate(self.workers)},
            {f: i for i, f in enumerate(self.firms)},
            {d: i for i, d in enumerate(self.days)},
        )
        return sorted(set(self.contracts), key=lambda c: tuple(r[x] for r, x in zip(rank, c)))


def compile_agent(
    problem: ScheduleProblem,
    side: str,
    agent: str,
    universe: ContractUniverse | None = None,
) -> QuotaChoiceSpec:
    """The quota rule of one agent over the market's contract universe."""
    if universe is None:
        universe = ContractUniverse(contract_label(*t) for t in problem.triples())
    if side == WORKER:
        spec = problem.worker_specs.get(agent, AgentSpec())
        def triple(other, day):
            return (agent, other, day)
        ckind = "firm"
    elif side == FIRM:
        spec = problem.firm_specs.get(agent, AgentSpec())
        def triple(other, day):
            return (other, agent, day)
        ckind = "worker"
    else:
        raise ValueError(f"side must be 'worker' or 'firm', not {side!r}")

    preference = [universe.index(contract_label(*triple(o, d))) for o, d in spec.preference]
    groups = []
    names = []
    for day, q in spec.day_quotas.items():
        members = [i for (o, d), i in zip(spec.preference, preference) if d == day]
        groups.append((universe.set(members), q))
        names.append(f"day {day}")
    for other, q in spec.counterpart_quotas.items():
        members = [i for (o, d), i in zip(spec.preference, preference) if o == other]
        groups.append((universe.set(members), q))
        names.append(f"{ckind} {other}")
    qspec = QuotaChoiceSpec(universe, tuple(preference), spec.quota, tuple(groups))

    if not spec.allow_overlap:
        live = effective_groups(qspec)
        for x in range(len(live)):
            for y in range(x + 1, len(live)):
                a, b = live[x], live[y]
                common = groups[a][0] & groups[b][0]
                if common:
                    raise SpecError(
                        f"{side} {agent}: binding quota groups '{names[a]}' and '{names[b]}' "
                        f"share {common!r}; overlapping groups can break the revealed "
                        "preference property (set allow_overlap to accept that)"
                    )
    return qspec


@dataclass(frozen=True)
class CompiledMarket:
    problem: ScheduleProblem
    universe: ContractUniverse
    triples: tuple[Triple, ...]
    worker_choice: ChoiceFunction
    firm_choice: ChoiceFunction
    agent_specs: Mapping[tuple[str, str], QuotaChoiceSpec]

    def set_of(self, triples: Iterable[Sequence[str]]) -> ContractSet:
        return self.universe.set(contract_label(*t) for t in triples)

    def triples_of(self, s: ContractSet) -> list[Triple]:
        return [self.triples[i] for i in s.indices()]

    def schedule(self, s: ContractSet) -> list[str]:
        """Compact per-pair listing, e.g. ``(w1,f2,d1-d4)``."""
        return compact_schedule(self.triples_of(s), self.problem.days)


def compact_schedule(triples: Iterable[Triple], days: Sequence[str]) -> list[str]:
    order = {d: i for i, d in enumerate(days)}
    grouped: dict[tuple[str, str], list[int]] = {}
    for w, f, d in triples:
        grouped.setdefault((w, f), []).append(order[d])
    out = []
    for (w, f), ks in grouped.items():
        ks.sort()
        runs = []
        start = prev = ks[0]
        for k in ks[1:] + [None]:
            if k is not None and k == prev + 1:
                prev = k
                continue
            runs.append(days[start] if start == prev else f"{days[start]}-{days[prev]}")
            if k is not None:
                start = prev = k
        out.append(f"({w},{f},{','.join(runs)})")
    return out


def build_market(problem: ScheduleProblem) -> CompiledMarket:
    triples = tuple(problem.triples())
    universe = ContractUniverse(contract_label(*t) for t in triples)
    specs = {}

    def side_map(side: str, agents: Sequence[str], position: int, allow) -> ChoiceFunction:
        children = []
        for agent in agents:
            qspec = compile_agent(problem, side, agent, universe)
            specs[(side, agent)] = qspec
            block = universe.set(i for i, t in enumerate(triples) if t[position] == agent)
            child = build_quota_choice(qspec, allow(agent), name=f"C_{agent}")
            children.append((block, child))
        name = "C_W" if side == WORKER else "C_F"
        if not children:
            return ChoiceFunction(universe, lambda m: 0, name=name)
        return combine_partition(children, name=name)

    c_w = side_map(
        WORKER, problem.workers, 0,
        lambda a: problem.worker_specs.get(a, AgentSpec()).allow_overlap,
    )
    c_f = side_map(
        FIRM, problem.firms, 1,
        lambda a: problem.firm_specs.get(a, AgentSpec()).allow_overlap,
    )
    return CompiledMarket(problem, universe, triples, c_w, c_f, specs)


# ------------------------------------------------------------------ hours


@dataclass(frozen=True)
class HoursEncoding:
    """Hour caps per worker/firm pair, expanded into one contract per hour.

    ``worker_caps[(w, f)]`` is the most hours ``w`` accepts at ``f``;
    ``firm_caps[(w, f)]`` the most hours ``f`` accepts from ``w``. Pairs not
    ranked by both sides are unacceptable. Optional totals cap an agent's
    hours over all partners.
    """

    workers: tuple[str, ...]
    firms: tuple[str, ...]
    worker_rankings: Mapping[str, tuple[str, ...]]
    firm_rankings: Mapping[str, tuple[str, ...]]
    worker_caps: Mapping[tuple[str, str], int]
    firm_caps: Mapping[tuple[str, str], int]
    worker_totals: Mapping[str, int] = field(default_factory=dict)
    firm_totals: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "workers", tuple(self.workers))
        object.__setattr__(self, "firms", tuple(self.firms))
        for name in ("worker_rankings", "firm_rankings"):
            object.__setattr__(self, name, {k: tuple(v) for k, v in getattr(self, name).items()})
        for name in ("worker_caps", "firm_caps"):
            object.__setattr__(self, name, {tuple(k): v for k, v in getattr(self, name).items()})
        for name in ("worker_totals", "firm_totals"):
            object.__setattr__(self, name, dict(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        for side, agents, rankings, others, caps in (
            ("worker", self.workers, self.worker_rankings, self.firms, self.worker_caps),
            ("firm", self.firms, self.firm_rankings, self.workers, self.firm_caps),
        ):
            for agent, ranking in rankings.items():
                if agent not in agents:
                    raise SpecError(f"{side}_rankings: unknown {side} {agent}")
                if len(set(ranking)) != len(ranking):
                    raise SpecError(f"{side}_rankings.{agent}: ranking is not strict")
                for other in ranking:
                    if other not in others:
                        raise SpecError(f"{side}_rankings.{agent}: unknown partner {other}")
                    key = (agent, other) if side == "worker" else (other, agent)
                    if key not in caps:
                        raise SpecError(f"{side}_caps: no hour cap for {key[0]}/{key[1]}")
            for key, q in caps.items():
                if q < 0:
                    raise SpecError(f"{side}_caps.{key[0]}/{key[1]}: quota must be >= 0")
        for side, totals in (("worker", self.worker_totals), ("firm", self.firm_totals)):
            for agent, q in totals.items():
                if q < 0:
                    raise SpecError(f"{side}_totals.{agent}: quota must be >= 0")

    def mutual(self, worker: str, firm: str) -> bool:
        return firm in self.worker_rankings.get(worker, ()) and worker in self.firm_rankings.get(
            firm, ()
        )

    def contracts(self) -> list[Triple]:
        out = []
        for w in self.workers:
            for f in self.firms:
                if self.mutual(w, f):
                    top = max(self.worker_caps[(w, f)], self.firm_caps[(w, f)])
                    out.extend((w, f, str(k)) for k in range(1, top + 1))
        return out


def expand_hours(enc: HoursEncoding) -> ScheduleProblem:
    """Discrete-hours market: slot ``k`` of a pair is its ``k``-th hour.

    Each agent ranks all hours with its favourite partner before any hour with
    the next one, earlier hours first.
    """
    contracts = enc.contracts()
    top = max((int(d) for _, _, d in contracts), default=0)
    days = tuple(str(k) for k in range(1, top + 1))
    worker_specs = {}
    for w in enc.workers:
        pref = [
            (f, str(k))
            for f in enc.worker_rankings.get(w, ())
            if enc.mutual(w, f)
            for k in range(1, enc.worker_caps[(w, f)] + 1)
        ]
        worker_specs[w] = AgentSpec(tuple(pref), enc.worker_totals.get(w))
    firm_specs = {}
    for f in enc.firms:
        pref = [
            (w, str(k))
            for w in enc.firm_rankings.get(f, ())
            if enc.mutual(w, f)
            for k in range(1, enc.firm_caps[(w, f)] + 1)
        ]
        firm_specs[f] = AgentSpec(tuple(pref), enc.firm_totals.get(f))
    return ScheduleProblem(enc.workers, enc.firms, days, worker_specs, firm_specs, tuple(contracts))


@dataclass(frozen=True)
class HoursTable:
    hours: Mapping[tuple[str, str], int]
    warnings: tuple[str, ...] = ()


def interpret_hours(s: ContractSet, enc: HoursEncoding) -> HoursTable:
    """Hours per pair: the largest hour index held, 0 when none."""
    by_label = {contract_label(*t): t for t in enc.contracts()}
    held: dict[tuple[str, str], set[int]] = {}
    for label in s:
        w, f, k = by_label[label]
        held.setdefault((w, f), set()).add(int(k))
    hours = {}
    warnings = []
    for w in enc.workers:
        for f in enc.firms:
            ks = held.get((w, f), set())
            hours[(w, f)] = max(ks, default=0)
            if ks and ks != set(range(1, hours[(w, f)] + 1)):
                warnings.append(
                    f"non-contiguous hours for {w}/{f}: holds {sorted(ks)}, reported as {hours[(w, f)]}"
                )
    return HoursTable(hours, tuple(warnings))


__all__ = [
    "AgentSpec",
    "CompiledMarket",
    "HoursEncoding",
    "HoursTable",
    "ScheduleProblem",
    "build_market",
    "compact_schedule",
    "compile_agent",
    "contract_label",
    "expand_hours",
    "interpret_hours",
]
