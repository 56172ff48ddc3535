"""Fixed-point iteration for worker-optimal and firm-optimal stable sets.

The map iterated is ``f(A, B) = (X - R_F(B), X - R_W(A))`` on pairs of
contract sets ordered by ``(A, B) <= (A', B')`` iff ``A <= A'`` and
``B >= B'``. With monotone rejection maps it is monotone, so iterating from
the top ``(X, {})`` reaches the greatest fixed point (worker-optimal) and from
the bottom ``({}, X)`` the least one (firm-optimal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import CLASSIFY_CAP, classify
from .core import CapExceededError, ChoiceFunction, ContractSet, SchedMatchError

WORKER = "worker"
FIRM = "firm"
PAIR = "pair"
ALTERNATING = "alternating"
FIXED_POINT_CAP = 10

STABLE = "stable"
NOT_GUARANTEED = "fixed point; stability not guaranteed"
UNVERIFIED = "unverified"


class ConvergenceError(SchedMatchError, RuntimeError):
    """The iteration exceeded its bound; the rejection maps cannot all be monotone."""


@dataclass(frozen=True)
class TraceStep:
    index: int
    name: str  # "X" (offered to workers) or "Y" (offered to firms)
    members: ContractSet

    @property
    def column(self) -> str:
        return f"{self.name}_{self.index}"


@dataclass(frozen=True)
class IterationTrace:
    style: str
    steps: tuple[TraceStep, ...]

    def columns(self) -> list[str]:
        return [s.column for s in self.steps]

    def pairs(self) -> list[tuple[int, ContractSet, ContractSet]]:
        """``(n, X_n, Y_n)`` triples; only meaningful for the pair style."""
        xs = {s.index: s.members for s in self.steps if s.name == "X"}
        ys = {s.index: s.members for s in self.steps if s.name == "Y"}
        return [(n, xs[n], ys[n]) for n in sorted(xs) if n in ys]

    def __len__(self) -> int:
        """Number of iterates recorded (a pair-style iterate holds both sets)."""
        return len({s.index for s in self.steps})


@dataclass(frozen=True)
class SolveOutcome:
    stable_set: ContractSet
    witness_worker: ContractSet
    witness_firm: ContractSet
    trace: IterationTrace
    iterations: int
    side: str
    style: str
    status: str = NOT_GUARANTEED
    notes: tuple[str, ...] = field(default_factory=tuple)


def _check(c_w: ChoiceFunction, c_f: ChoiceFunction, *sets: ContractSet) -> None:
    c_w.universe.check(c_f.universe)
    for s in sets:
        c_w.universe.check(s.universe)


def _step_masks(c_w, c_f, full: int, a: int, b: int) -> tuple[int, int]:
    return full & ~c_f.reject_mask(b), full & ~c_w.reject_mask(a)


def step(
    c_w: ChoiceFunction, c_f: ChoiceFunction, a: ContractSet, b: ContractSet
) -> tuple[ContractSet, ContractSet]:
    """One application of ``(A, B) -> (X - R_F(B), X - R_W(A))``."""
    _check(c_w, c_f, a, b)
    u = c_w.universe
    na, nb = _step_masks(c_w, c_f, u.full_mask, a.mask, b.mask)
    return u.from_mask(na), u.from_mask(nb)


def _iteration_bound(n: int) -> int:
    return 2 * n + 4


def _solve_pair(c_w, c_f, side: str):
    u = c_w.universe
    full = u.full_mask
    a, b = (full, 0) if side == WORKER else (0, full)
    steps = [TraceStep(0, "X", u.from_mask(a)), TraceStep(0, "Y", u.from_mask(b))]
    bound = _iteration_bound(u.size)
    n = 0
    while True:
        na, nb = _step_masks(c_w, c_f, full, a, b)
        n += 1
        if (na, nb) == (a, b):
            return a, b, a & b, steps, n
        if n > bound:
            raise ConvergenceError(
                f"no fixed point after {bound} steps; the rejection maps are not monotone"
            )
        a, b = na, nb
        steps += [TraceStep(n, "X", u.from_mask(a)), TraceStep(n, "Y", u.from_mask(b))]


def _solve_alternating(c_w, c_f, side: str):
    """Track only every other iterate, as in deferred acceptance.

    Worker side: X_0 = X, then Y_1, X_2, Y_3, ... until X_{n-1} = X_{n+1}, and
    S = C_W(X_{n-1}). The firm side starts from Y_0 = X and swaps the roles.
    """
    u = c_w.universe
    full = u.full_mask
    first, second = ("X", "Y") if side == WORKER else ("Y", "X")
    chooser = {"X": c_w, "Y": c_f}
    other = {"X": "Y", "Y": "X"}
    current = full
    name = first
    history = {first: [full], second: []}
    steps = [TraceStep(0, first, u.from_mask(full))]
    bound = _iteration_bound(u.size) + 2
    k = 0
    while True:
        # The set offered to one side determines the set offered to the other.
        current = (full & ~current) | chooser[name].choose_mask(current)
        name = other[name]
        k += 1
        history[name].append(current)
        steps.append(TraceStep(k, name, u.from_mask(current)))
        if name == first and history[first][-1] == history[first][-2]:
            break
        if k > bound:
            raise ConvergenceError(
                f"no fixed point after {bound} steps; the rejection maps are not monotone"
            )
    settled = history[first][-2]
    partner = history[second][-1]
    s = chooser[first].choose_mask(settled)
    a, b = (settled, partner) if side == WORKER else (partner, settled)
    return a, b, s, steps, k // 2


def solve(
    c_w: ChoiceFunction,
    c_f: ChoiceFunction,
    side: str = WORKER,
    style: str = PAIR,
    *,
    check_revealing: bool = False,
    samples: int = 2000,
) -> SolveOutcome:
    """Iterate to the worker-optimal (``side="worker"``) or firm-optimal fixed point.

    The result is a stable set whenever both maps are revealing. The status
    field says whether that is known: ``"stable"`` when both maps carry the
    guarantee or pass the optional ``check_revealing`` classification,
    ``"unverified"`` when that check fails, and ``"fixed point; stability not
    guaranteed"`` otherwise.
    """
    _check(c_w, c_f)
    if side not in (WORKER, FIRM):
        raise ValueError(f"side must be 'worker' or 'firm', not {side!r}")
    if style not in (PAIR, ALTERNATING):
        raise ValueError(f"style must be 'pair' or 'alternating', not {style!r}")

    notes = []
    status = NOT_GUARANTEED
    if all("revealing" in c.guarantees for c in (c_w, c_f)):
        status = STABLE
    elif check_revealing:
        status = STABLE
        for c in (c_w, c_f):
            if "revealing" in c.guarantees:
                continue
            n = c.universe.size
            report = classify(c, None if n <= CLASSIFY_CAP else samples)
            c._derived.setdefault("report", report)
            if not report.is_revealing.ok:
                status = UNVERIFIED
                notes.append(f"{c.name} is not revealing: {report.is_revealing}")

    run = _solve_pair if style == PAIR else _solve_alternating
    a, b, s, steps, iterations = run(c_w, c_f, side)
    u = c_w.universe
    return SolveOutcome(
        stable_set=u.from_mask(s),
        witness_worker=u.from_mask(a),
        witness_firm=u.from_mask(b),
        trace=IterationTrace(style, tuple(steps)),
        iterations=iterations,
        side=side,
        style=style,
        status=status,
        notes=tuple(notes),
    )


def enumerate_fixed_points(
    c_w: ChoiceFunction, c_f: ChoiceFunction, *, cap: int = FIXED_POINT_CAP
) -> list[tuple[ContractSet, ContractSet]]:
    """All ``(A, B)`` with ``step(A, B) == (A, B)``, sorted by ``(A, B)`` masks.

    A fixed point's first component is determined by its second, so one pass
    over the choices of ``B`` is enough.
    """
    _check(c_w, c_f)
    u = c_w.universe
    if u.size > cap:
        raise CapExceededError(
            f"fixed-point enumeration is limited to {cap} contracts (got {u.size})"
        )
    full = u.full_mask
    out = []
    for b in range(1 << u.size):
        a = full & ~c_f.reject_mask(b)
        if full & ~c_w.reject_mask(a) == b:
            out.append((a, b))
    out.sort()
    return [(u.from_mask(a), u.from_mask(b)) for a, b in out]


def pair_leq(p: tuple[ContractSet, ContractSet], q: tuple[ContractSet, ContractSet]) -> bool:
    """The lattice order on pairs: ``A <= A'`` and ``B >= B'``."""
    return p[0] <= q[0] and q[1] <= p[1]


__all__ = [
    "ALTERNATING",
    "ConvergenceError",
    "FIRM",
    "IterationTrace",
    "NOT_GUARANTEED",
    "PAIR",
    "STABLE",
    "SolveOutcome",
    "TraceStep",
    "UNVERIFIED",
    "WORKER",
    "enumerate_fixed_points",
    "pair_leq",
    "solve",
    "step",
]
