"""Property classifiers for choice maps and stability checks for contract sets.

The exhaustive classifier tabulates the map once and checks every pair of
subsets with numpy; the stability checks work over the subsets lying between
a candidate set ``S`` and the whole universe.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    CapExceededError,
    ChoiceFunction,
    ContractSet,
    PreconditionError,
    iter_bits,
)

CLASSIFY_CAP = 12
DEFINITIONAL_CAP = 15
CONSISTENT_CAP = 20
ENUMERATE_CAPS = {"definitional": 12, "consistent-witness": 14, "revealing-fast": 20}
METHODS = ("definitional", "consistent-witness", "revealing-fast")

TRUE = "true"
SAMPLED = "true (sampled)"
FALSE = "false"
NOT_EVALUATED = "not-evaluated"

PAIR_PROPERTIES = ("revealing", "consistent", "persistent", "rejection_monotone")
PROPERTIES = ("choice_map", "revealing", "consistent", "persistent", "idempotent", "rejection_monotone")

# Rows per numpy block in the exhaustive pair sweep (rows * 2**n cells).
_BLOCK_CELLS = 1 << 20


@dataclass(frozen=True)
class PropertyVerdict:
    status: str
    witness: tuple[ContractSet, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.status in (TRUE, SAMPLED)

    def __str__(self) -> str:
        if self.witness is None:
            return self.status
        return f"{self.status} (witness {', '.join(map(repr, self.witness))})"


@dataclass(frozen=True)
class PropertyReport:
    is_choice_map: PropertyVerdict
    is_revealing: PropertyVerdict
    is_consistent: PropertyVerdict
    is_persistent: PropertyVerdict
    is_idempotent: PropertyVerdict
    rejection_monotone: PropertyVerdict
    mode: str = "exhaustive"

    def verdict(self, prop: str) -> PropertyVerdict:
        return getattr(self, prop if prop == "rejection_monotone" else f"is_{prop}")

    def as_dict(self) -> dict[str, PropertyVerdict]:
        return {p: self.verdict(p) for p in PROPERTIES}

    def lines(self) -> list[str]:
        width = max(len(p) for p in PROPERTIES)
        return [f"{p:<{width}}  {v}" for p, v in self.as_dict().items()]


def _violates(c, prop: str, a: int, b: int = 0) -> bool:
    """Does the single set ``a`` (or pair ``(a, b)``) break ``prop`` for evaluator ``c``?"""
    if prop == "choice_map":
        return c(a) & ~a != 0
    if prop == "idempotent":
        ca = c(a)
        return c(ca) != ca
    ca = c(a)
    if prop == "revealing":
        return ca & ~b == 0 and a & c(b) & ~ca != 0
    if prop == "consistent":
        return ca & ~b == 0 and b & ~a == 0 and c(b) != ca
    if prop == "persistent":
        return a & ~b == 0 and a & c(b) & ~ca != 0
    if prop == "rejection_monotone":
        cb = c(b)
        return a & ~b == 0 and (a & ~ca) & ~(b & ~cb) != 0
    raise ValueError(f"unknown property {prop!r}")


def replay(choice: ChoiceFunction, prop: str, witness: Sequence[ContractSet]) -> bool:
    """True when ``witness`` really falsifies ``prop`` for ``choice``."""
    masks = [w.mask for w in witness]
    return _violates(choice.raw, prop, *masks)


def _first_pair_violation(t: np.ndarray, prop: str) -> tuple[int, int] | None:
    size = len(t)
    b = np.arange(size, dtype=np.int64)[None, :]
    tb = t[None, :]
    rows = max(1, _BLOCK_CELLS // size)
    for start in range(0, size, rows):
        a = np.arange(start, min(size, start + rows), dtype=np.int64)[:, None]
        ta = t[a]
        if prop == "revealing":
            bad = ((ta & ~b) == 0) & ((a & tb & ~ta) != 0)
        elif prop == "consistent":
            bad = ((ta & ~b) == 0) & ((b & ~a) == 0) & (tb != ta)
        elif prop == "persistent":
            bad = ((a & ~b) == 0) & ((a & tb & ~ta) != 0)
        else:
            bad = ((a & ~b) == 0) & (((a & ~ta) & ~(b & ~tb)) != 0)
        flat = bad.ravel()
        k = int(flat.argmax())
        if flat[k]:
            return start + k // size, k % size
    return None


def _exhaustive(choice: ChoiceFunction) -> dict[str, tuple[int, ...] | None]:
    n = choice.universe.size
    size = 1 << n
    t = np.fromiter((choice.raw(a) for a in range(size)), dtype=np.int64, count=size)
    idx = np.arange(size, dtype=np.int64)
    found: dict[str, tuple[int, ...] | None] = {}
    bad = np.nonzero(t & ~idx)[0]
    if len(bad):
        return {"choice_map": (int(bad[0]),)}
    found["choice_map"] = None
    bad = np.nonzero(t[t] != t)[0]
    found["idempotent"] = (int(bad[0]),) if len(bad) else None
    for prop in PAIR_PROPERTIES:
        found[prop] = _first_pair_violation(t, prop)
    return found


def _sample_pairs(n: int, full: int, count: int, rng: random.Random, c) -> list[tuple[int, int]]:
    pairs = []
    for i in range(count):
        a = rng.getrandbits(n) if n else 0
        kind = i % 4
        if kind == 0:
            b = rng.getrandbits(n) if n else 0
        elif kind == 1:  # superset of C(A)
            b = c(a) | (rng.getrandbits(n) if n else 0)
        elif kind == 2:  # subset of A containing C(A)
            b = c(a) | (a & (rng.getrandbits(n) if n else 0))
        else:  # superset of A
            b = a | (rng.getrandbits(n) if n else 0)
        pairs.append((a, b & full))
    return pairs


def _restricted_pairs(n: int, count: int, rng: random.Random) -> list[tuple[int, int]]:
    """All pairs varying over a random <=5-element window on a shared random background."""
    pairs = []
    for _ in range(count):
        window = rng.sample(range(n), min(5, n))
        background = rng.getrandbits(n) if n else 0
        for j in window:
            background &= ~(1 << j)
        subs = [background]
        for j in window:
            subs += [s | 1 << j for s in subs]
        pairs.extend((a, b) for a in subs for b in subs)
    return pairs


def _sampled(choice: ChoiceFunction, samples: int, seed: int, windows: int):
    n = choice.universe.size
    full = choice.universe.full_mask
    rng = random.Random(seed)
    memo: dict[int, int] = {}

    def c(m: int) -> int:
        out = memo.get(m)
        if out is None:
            out = memo[m] = choice.raw(m)
        return out

    pairs = _sample_pairs(n, full, samples, rng, c) + _restricted_pairs(n, windows, rng)
    singles = sorted({a for a, _ in pairs} | {b for _, b in pairs})
    found: dict[str, tuple[int, ...] | None] = {}
    found["choice_map"] = next(((a,) for a in singles if _violates(c, "choice_map", a)), None)
    if found["choice_map"] is not None:
        return found, c
    found["idempotent"] = next(((a,) for a in singles if _violates(c, "idempotent", a)), None)
    for prop in PAIR_PROPERTIES:
        found[prop] = next((p for p in pairs if _violates(c, prop, *p)), None)
    return found, c


def _derive(found: dict[str, tuple[int, ...] | None], c) -> None:
    """Transfer witnesses along the implications between properties.

    Revealing is consistency plus persistence, persistence is monotone
    rejection, and either one forces idempotence; each implication comes with
    an explicit witness transformation, replayed before it is recorded.
    """
    changed = True
    while changed:
        changed = False

        def put(prop: str, cand: tuple[int, ...]) -> None:
            nonlocal changed
            if found.get(prop) is None and _violates(c, prop, *cand):
                found[prop] = cand
                changed = True

        if found.get("idempotent") is not None:
            (a,) = found["idempotent"]
            put("consistent", (a, c(a)))
            put("persistent", (c(a), a))
        if found.get("persistent") is not None:
            put("revealing", found["persistent"])
            put("rejection_monotone", found["persistent"])
        if found.get("rejection_monotone") is not None:
            put("persistent", found["rejection_monotone"])
        if found.get("consistent") is not None:
            a, b = found["consistent"]
            put("revealing", (a, b))
            put("revealing", (b, a))
        if found.get("revealing") is not None:
            a, b = found["revealing"]
            put("persistent", (a, a | b))
            put("consistent", (a | b, b))


def classify(
    choice: ChoiceFunction,
    sampled: int | None = None,
    *,
    seed: int = 0,
    windows: int = 8,
) -> PropertyReport:
    """Check which of the standard choice-map properties hold.

    With ``sampled=None`` every subset (and pair of subsets) is checked, which
    needs ``|X| <= 12``. Otherwise ``sampled`` random pairs plus all pairs over
    ``windows`` random restrictions to at most 5 contracts are tried, and
    properties that survive are reported as ``"true (sampled)"``.
    """
    n = choice.universe.size
    if sampled is None:
        if n > CLASSIFY_CAP:
            raise CapExceededError(
                f"exhaustive classification is limited to {CLASSIFY_CAP} contracts "
                f"(got {n}); use sampled mode"
            )
        found = _exhaustive(choice)
        c = choice.raw
        holds, mode = TRUE, "exhaustive"
    else:
        found, c = _sampled(choice, sampled, seed, windows)
        holds, mode = SAMPLED, f"sampled:{sampled}"
    u = choice.universe

    if found["choice_map"] is not None:
        bad = PropertyVerdict(FALSE, (u.from_mask(found["choice_map"][0]),))
        skip = PropertyVerdict(NOT_EVALUATED)
        return PropertyReport(bad, skip, skip, skip, skip, skip, mode)
    if sampled is not None:
        _derive(found, c)

    def verdict(prop: str) -> PropertyVerdict:
        w = found.get(prop)
        if w is None:
            return PropertyVerdict(holds)
        return PropertyVerdict(FALSE, tuple(u.from_mask(m) for m in w))

    return PropertyReport(
        verdict("choice_map"),
        verdict("revealing"),
        verdict("consistent"),
        verdict("persistent"),
        verdict("idempotent"),
        verdict("rejection_monotone"),
        mode,
    )


def known_property(choice: ChoiceFunction, prop: str, *, samples: int = 2000) -> PropertyVerdict:
    """Verdict for one property, trusting construction guarantees, else classifying once."""
    if prop in choice.guarantees:
        return PropertyVerdict(TRUE)
    report = choice._derived.get("report")
    if report is None:
        sampled = None if choice.universe.size <= CLASSIFY_CAP else samples
        report = choice._derived["report"] = classify(choice, sampled)
    return report.verdict(prop)


def _require(choice: ChoiceFunction, prop: str, method: str) -> None:
    v = known_property(choice, prop)
    if not v.ok:
        raise PreconditionError(
            f"the {method} method needs {prop} choice maps; {choice.name} is not {prop} ({v})"
        )


# ---------------------------------------------------------------- stability


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    method: str
    witness_worker: ContractSet | None = None
    witness_firm: ContractSet | None = None
    blocker: int | None = None
    reason: str = ""

    def describe(self) -> str:
        if self.stable:
            return (
                f"stable ({self.method}); S_W = {self.witness_worker!r}, "
                f"S_F = {self.witness_firm!r}"
            )
        return f"unstable ({self.method}): {self.reason}"


def _check_pair(c_w: ChoiceFunction, c_f: ChoiceFunction, s: ContractSet) -> None:
    c_w.universe.check(c_f.universe)
    c_w.universe.check(s.universe)


def is_individually_rational(c_w: ChoiceFunction, c_f: ChoiceFunction, s: ContractSet) -> bool:
    _check_pair(c_w, c_f, s)
    return c_w.choose_mask(s.mask) == s.mask == c_f.choose_mask(s.mask)


def find_blocker(c_w: ChoiceFunction, c_f: ChoiceFunction, s: ContractSet) -> int | None:
    """First contract outside ``S`` that both sides would take up, or None."""
    _check_pair(c_w, c_f, s)
    m = s.mask
    for x in iter_bits(s.universe.full_mask & ~m):
        grown = m | 1 << x
        if c_w.choose_mask(grown) != m and c_f.choose_mask(grown) != m:
            return x
    return None


def _between(s: int, free: int) -> list[int]:
    """All masks ``s | t`` for ``t`` a subset of ``free``; bit j of the list index picks the j-th free contract."""
    out = [s]
    for x in iter_bits(free):
        bit = 1 << x
        out += [m | bit for m in out]
    return out


def _hereditary(good: np.ndarray, m: int) -> np.ndarray:
    """``h[t]`` is true iff ``good`` holds on every subset of ``t``."""
    h = good.copy()
    for j in range(m):
        view = h.reshape(-1, 2, 1 << j)
        view[:, 1, :] &= view[:, 0, :]
    return h


def _unstable(c_w, c_f, s: ContractSet, method: str, reason: str) -> StabilityVerdict:
    if not is_individually_rational(c_w, c_f, s):
        return StabilityVerdict(False, method, reason="not individually rational")
    x = find_blocker(c_w, c_f, s)
    if x is not None:
        reason = f"blocked by {s.universe.label(x)}"
    return StabilityVerdict(False, method, blocker=x, reason=reason)


def _definitional(c_w, c_f, s: ContractSet) -> StabilityVerdict:
    u = s.universe
    free = u.full_mask & ~s.mask
    m = bin(free).count("1")
    if m > DEFINITIONAL_CAP:
        raise CapExceededError(
            f"the definitional check is limited to {DEFINITIONAL_CAP} contracts outside S (got {m})"
        )
    between = _between(s.mask, free)
    gw = np.fromiter((c_w.choose_mask(a) == s.mask for a in between), dtype=bool, count=len(between))
    gf = np.fromiter((c_f.choose_mask(a) == s.mask for a in between), dtype=bool, count=len(between))
    # Both witness conditions are inherited by smaller witnesses, so S_F can be
    # taken as S plus exactly the contracts missing from S_W.
    ok = _hereditary(gw, m) & _hereditary(gf, m)[::-1]
    hits = np.flatnonzero(ok)
    if len(hits) == 0:
        return _unstable(c_w, c_f, s, "definitional", "no witness pair satisfies the definition")
    t = int(hits[0])
    return StabilityVerdict(
        True,
        "definitional",
        u.from_mask(between[t]),
        u.from_mask(between[(len(between) - 1) ^ t]),
    )


def _consistent_witness(c_w, c_f, s: ContractSet) -> StabilityVerdict:
    u = s.universe
    free = u.full_mask & ~s.mask
    m = bin(free).count("1")
    if m > CONSISTENT_CAP:
        raise CapExceededError(
            f"the consistent-witness check is limited to {CONSISTENT_CAP} contracts outside S (got {m})"
        )
    if not is_individually_rational(c_w, c_f, s):
        return StabilityVerdict(False, "consistent-witness", reason="not individually rational")
    between = _between(s.mask, free)
    gw = np.fromiter((c_w.choose_mask(a) == s.mask for a in between), dtype=bool, count=len(between))
    gf = np.fromiter((c_f.choose_mask(a) == s.mask for a in between), dtype=bool, count=len(between))
    hits = np.flatnonzero(gw & gf[::-1])
    if len(hits) == 0:
        return _unstable(c_w, c_f, s, "consistent-witness", "no covering witness pair")
    t = int(hits[0])
    return StabilityVerdict(
        True,
        "consistent-witness",
        u.from_mask(between[t]),
        u.from_mask(between[(len(between) - 1) ^ t]),
    )


def _revealing_fast(c_w, c_f, s: ContractSet) -> StabilityVerdict:
    u = s.universe
    if not is_individually_rational(c_w, c_f, s):
        return StabilityVerdict(False, "revealing-fast", reason="not individually rational")
    x = find_blocker(c_w, c_f, s)
    if x is not None:
        return StabilityVerdict(False, "revealing-fast", blocker=x, reason=f"blocked by {u.label(x)}")
    # Witnesses: every contract S can absorb without either side changing its choice.
    w = f = 0
    for y in range(u.size):
        grown = s.mask | 1 << y
        if c_w.choose_mask(grown) == s.mask:
            w |= 1 << y
        if c_f.choose_mask(grown) == s.mask:
            f |= 1 << y
    return StabilityVerdict(True, "revealing-fast", u.from_mask(w), u.from_mask(f))


_CHECKS = {
    "definitional": _definitional,
    "consistent-witness": _consistent_witness,
    "revealing-fast": _revealing_fast,
}
_NEEDS = {"definitional": None, "consistent-witness": "consistent", "revealing-fast": "revealing"}


def _method(method: str) -> str:
    aliases = {"consistent": "consistent-witness", "revealing": "revealing-fast"}
    method = aliases.get(method, method)
    if method not in _CHECKS:
        raise ValueError(f"unknown stability method {method!r}; choose from {', '.join(METHODS)}")
    return method


def check_method_preconditions(c_w: ChoiceFunction, c_f: ChoiceFunction, method: str) -> None:
    method = _method(method)
    need = _NEEDS[method]
    if need:
        _require(c_w, need, method)
        _require(c_f, need, method)


def is_stable(
    c_w: ChoiceFunction,
    c_f: ChoiceFunction,
    s: ContractSet,
    method: str = "definitional",
    *,
    check_preconditions: bool = True,
) -> StabilityVerdict:
    """Decide whether ``s`` is a stable set.

    ``definitional`` searches witness sets directly and needs nothing from the
    maps; ``consistent-witness`` needs both maps consistent and
    ``revealing-fast`` needs both maps revealing (it checks individual
    rationality and blocking contracts only).
    """
    _check_pair(c_w, c_f, s)
    method = _method(method)
    if check_preconditions:
        check_method_preconditions(c_w, c_f, method)
    return _CHECKS[method](c_w, c_f, s)


def enumerate_stable(
    c_w: ChoiceFunction,
    c_f: ChoiceFunction,
    method: str = "definitional",
    *,
    cap: int | None = None,
) -> list[ContractSet]:
    """Every stable set, in canonical order."""
    c_w.universe.check(c_f.universe)
    method = _method(method)
    u = c_w.universe
    limit = ENUMERATE_CAPS[method] if cap is None else cap
    if u.size > limit:
        raise CapExceededError(
            f"enumerating stable sets with the {method} method is limited to {limit} contracts "
            f"(got {u.size})"
        )
    check_method_preconditions(c_w, c_f, method)
    check = _CHECKS[method]
    out = []
    for s in range(1 << u.size):
        if c_w.choose_mask(s) != s or c_f.choose_mask(s) != s:
            continue
        cs = u.from_mask(s)
        if check(c_w, c_f, cs).stable:
            out.append(cs)
    return out


def range_equals_fixed_points(choice: ChoiceFunction) -> bool:
    """Whether the image of ``choice`` is exactly its set of fixed points."""
    n = choice.universe.size
    if n > CLASSIFY_CAP:
        raise CapExceededError(f"limited to {CLASSIFY_CAP} contracts (got {n})")
    image = {choice.choose_mask(a) for a in range(1 << n)}
    fixed = {a for a in range(1 << n) if choice.choose_mask(a) == a}
    return image == fixed


__all__ = [
    "FALSE",
    "METHODS",
    "NOT_EVALUATED",
    "PROPERTIES",
    "PropertyReport",
    "PropertyVerdict",
    "SAMPLED",
    "StabilityVerdict",
    "TRUE",
    "check_method_preconditions",
    "classify",
    "enumerate_stable",
    "find_blocker",
    "is_individually_rational",
    "is_stable",
    "known_property",
    "range_equals_fixed_points",
    "replay",
]
