"""Contract universes, contract sets and the choice-function wrapper.

Sets are stored as integer bitmasks: bit ``i`` stands for the ``i``-th label
of the universe. The integer value of the mask doubles as the canonical order
of sets used everywhere results are listed.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Sequence


class SchedMatchError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateLabelError(SchedMatchError, ValueError):
    pass


class UniverseMismatchError(SchedMatchError, ValueError):
    pass


class NotAChoiceMapError(SchedMatchError, ValueError):
    """An evaluator returned contracts that were not offered."""


class SpecError(SchedMatchError, ValueError):
    """A choice-map or problem specification is malformed."""


class CapExceededError(SchedMatchError, ValueError):
    """An exhaustive computation was asked for on a universe that is too large."""


class PreconditionError(SchedMatchError, ValueError):
    """A method needs a property of the choice maps that does not hold."""


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class ContractUniverse:
    """A finite, ordered set of distinct contract labels."""

    __slots__ = ("_labels", "_index", "_full")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(labels)
        index: dict[str, int] = {}
        for i, label in enumerate(labels):
            if label in index:
                raise DuplicateLabelError(f"duplicate label {label}")
            index[label] = i
        self._labels = labels
        self._index = index
        self._full = (1 << len(labels)) - 1

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def size(self) -> int:
        return len(self._labels)

    @property
    def full_mask(self) -> int:
        return self._full

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, ContractUniverse):
            return NotImplemented
        return self._labels == other._labels

    def __hash__(self) -> int:
        return hash(self._labels)

    def __repr__(self) -> str:
        return f"ContractUniverse({list(self._labels)!r})"

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown contract {label!r}") from None

    def label(self, i: int) -> str:
        return self._labels[i]

    def set(self, members: Iterable[str | int] = ()) -> ContractSet:
        """Build a set from labels or indices."""
        mask = 0
        for m in members:
            if isinstance(m, str):
                mask |= 1 << self.index(m)
            else:
                if not 0 <= m < len(self._labels):
                    raise IndexError(f"contract index {m} out of range")
                mask |= 1 << m
        return ContractSet(self, mask)

    def from_mask(self, mask: int) -> ContractSet:
        return ContractSet(self, mask)

    @property
    def empty(self) -> ContractSet:
        return ContractSet(self, 0)

    @property
    def full(self) -> ContractSet:
        return ContractSet(self, self._full)

    def subsets(self) -> Iterator[ContractSet]:
        """All subsets in canonical order."""
        for mask in range(1 << len(self._labels)):
            yield ContractSet(self, mask)

    def check(self, other: ContractUniverse) -> None:
        if other is not self and other != self:
            raise UniverseMismatchError("sets belong to different contract universes")


def make_universe(labels: Sequence[str]) -> ContractUniverse:
    return ContractUniverse(labels)


class ContractSet:
    """An immutable subset of a :class:`ContractUniverse`.

    Supports ``|``, ``&``, ``-``, ``^``, ``~`` (complement in the universe),
    ``<=``/``<`` (subset tests), ``len`` and membership by label or index.
    """

    __slots__ = ("universe", "mask")

    def __init__(self, universe: ContractUniverse, mask: int = 0):
        if mask < 0 or mask & ~universe.full_mask:
            raise ValueError("mask has bits outside the universe")
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("ContractSet is immutable")

    def _other(self, other: ContractSet) -> int:
        if not isinstance(other, ContractSet):
            raise TypeError(f"expected ContractSet, got {type(other).__name__}")
        self.universe.check(other.universe)
        return other.mask

    def __or__(self, other: ContractSet) -> ContractSet:
        return ContractSet(self.universe, self.mask | self._other(other))

    def __and__(self, other: ContractSet) -> ContractSet:
        return ContractSet(self.universe, self.mask & self._other(other))

    def __sub__(self, other: ContractSet) -> ContractSet:
        return ContractSet(self.universe, self.mask & ~self._other(other))

    def __xor__(self, other: ContractSet) -> ContractSet:
        return ContractSet(self.universe, self.mask ^ self._other(other))

    def __invert__(self) -> ContractSet:
        return ContractSet(self.universe, self.universe.full_mask & ~self.mask)

    def complement(self) -> ContractSet:
        return ~self

    union = __or__
    intersection = __and__
    difference = __sub__

    def __le__(self, other: ContractSet) -> bool:
        return self.mask & ~self._other(other) == 0

    def __lt__(self, other: ContractSet) -> bool:
        return self <= other and self.mask != other.mask

    def __ge__(self, other: ContractSet) -> bool:
        return other <= self

    def __gt__(self, other: ContractSet) -> bool:
        return other < self

    def issubset(self, other: ContractSet) -> bool:
        return self <= other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContractSet):
            return NotImplemented
        return self.mask == other.mask and (
            self.universe is other.universe or self.universe == other.universe
        )

    def __hash__(self) -> int:
        return hash(self.mask)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def __contains__(self, item: str | int) -> bool:
        i = self.universe.index(item) if isinstance(item, str) else item
        return bool(self.mask >> i & 1)

    def __iter__(self) -> Iterator[str]:
        return (self.universe.label(i) for i in iter_bits(self.mask))

    def indices(self) -> list[int]:
        return list(iter_bits(self.mask))

    def labels(self) -> list[str]:
        return list(self)

    def __repr__(self) -> str:
        return "{" + ", ".join(self) + "}"


Evaluator = Callable[[int], int]

# Memo tables past this size stop growing; evaluation still works.
_CACHE_LIMIT = 1 << 16


class ChoiceFunction:
    """A choice map ``A -> C(A)`` over a fixed universe.

    ``evaluator`` works on bitmasks. Every evaluation is checked for
    ``C(A) <= A``; a violation raises :class:`NotAChoiceMapError`. Results are
    memoized, which is sound because evaluators must be deterministic.

    ``guarantees`` lists properties (``"revealing"``, ``"consistent"``,
    ``"persistent"``, ``"idempotent"``) known to hold by construction, so that
    analysis code can skip exponential checks.
    """

    def __init__(
        self,
        universe: ContractUniverse,
        evaluator: Evaluator,
        *,
        name: str = "C",
        guarantees: Iterable[str] = (),
        note: str = "",
    ):
        self.universe = universe
        self.name = name
        self.guarantees = frozenset(guarantees)
        self.note = note
        self._evaluator = evaluator
        self._cache: dict[int, int] = {}
        self._derived: dict[str, object] = {}

    def raw(self, mask: int) -> int:
        """Evaluate without the inclusion check or the memo."""
        return self._evaluator(mask)

    def choose_mask(self, mask: int) -> int:
        out = self._cache.get(mask)
        if out is not None:
            return out
        out = self._evaluator(mask)
        if out & ~mask:
            extra = ContractSet(self.universe, out & ~mask)
            offered = ContractSet(self.universe, mask)
            raise NotAChoiceMapError(
                f"{self.name} chose {extra!r} which is not in the offered set {offered!r}"
            )
        if len(self._cache) < _CACHE_LIMIT:
            self._cache[mask] = out
        return out

    def __call__(self, offered: ContractSet) -> ContractSet:
        self.universe.check(offered.universe)
        return ContractSet(self.universe, self.choose_mask(offered.mask))

    def reject_mask(self, mask: int) -> int:
        return mask & ~self.choose_mask(mask)

    def __repr__(self) -> str:
        return f"ChoiceFunction({self.name!r}, |X|={self.universe.size})"


class RejectionView:
    """``R(A) = A - C(A)`` for a wrapped choice function."""

    def __init__(self, base: ChoiceFunction):
        self.base = base

    def __call__(self, offered: ContractSet) -> ContractSet:
        return offered - self.base(offered)


def rejection(choice: ChoiceFunction, offered: ContractSet) -> ContractSet:
    """Contracts of ``offered`` that ``choice`` turns down."""
    return offered - choice(offered)
