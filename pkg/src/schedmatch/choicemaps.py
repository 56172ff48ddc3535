"""Concrete choice maps: greedy quota rules, partition combination, lookup tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import (
    CapExceededError,
    ChoiceFunction,
    ContractSet,
    ContractUniverse,
    NotAChoiceMapError,
    SpecError,
)

REVEALING_FAMILY = ("revealing", "consistent", "persistent", "idempotent")
TABLE_CAP = 10


class OverlappingGroupsError(SpecError):
    pass


@dataclass(frozen=True)
class QuotaChoiceSpec:
    """A preference list with a global quota and capped sub-groups.

    ``preference`` holds contract indices, most preferred first; contracts not
    listed are never accepted. ``global_quota=None`` means ``len(preference)``
    (no effective cap). ``groups`` pairs a member set with its quota.
    """

    universe: ContractUniverse
    preference: tuple[int, ...]
    global_quota: int | None = None
    groups: tuple[tuple[ContractSet, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "preference", tuple(self.preference))
        object.__setattr__(self, "groups", tuple((g, q) for g, q in self.groups))
        seen = set()
        for i in self.preference:
            if not 0 <= i < self.universe.size:
                raise SpecError(f"preference entry {i} is not a contract index")
            if i in seen:
                raise SpecError(
                    f"contract {self.universe.label(i)} appears twice in the preference list"
                )
            seen.add(i)
        if self.global_quota is not None and self.global_quota < 0:
            raise SpecError("quota must be >= 0")
        for members, q in self.groups:
            self.universe.check(members.universe)
            if q < 0:
                raise SpecError("quota must be >= 0")

    @classmethod
    def from_labels(
        cls,
        universe: ContractUniverse,
        preference: Sequence[str],
        quota: int | None = None,
        groups: Iterable[tuple[Iterable[str], int]] = (),
    ) -> QuotaChoiceSpec:
        return cls(
            universe,
            tuple(universe.index(x) for x in preference),
            quota,
            tuple((universe.set(m), q) for m, q in groups),
        )

    @property
    def acceptable(self) -> ContractSet:
        return self.universe.set(self.preference)

    @property
    def quota(self) -> int:
        return len(self.preference) if self.global_quota is None else self.global_quota


def effective_groups(spec: QuotaChoiceSpec) -> list[int]:
    """Indices of the groups that can ever bind.

    A group cannot bind when its quota reaches the global quota or the number
    of acceptable contracts it contains; dropping it changes no output.
    """
    accept = spec.acceptable.mask
    q = spec.quota
    keep = []
    for i, (members, qn) in enumerate(spec.groups):
        m = members.mask & accept
        if m and qn < q and qn < bin(m).count("1"):
            keep.append(i)
    return keep


def normalized_groups(spec: QuotaChoiceSpec) -> list[tuple[int, int]]:
    """Effective groups as ``(mask, quota)``, intersected with the acceptable set."""
    accept = spec.acceptable.mask
    return [(spec.groups[i][0].mask & accept, spec.groups[i][1]) for i in effective_groups(spec)]


def _overlaps(groups: list[tuple[int, int]]) -> list[tuple[int, int]]:
    pairs = []
    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            if groups[a][0] & groups[b][0]:
                pairs.append((a, b))
    return pairs


class _QuotaRule:
    """Compiled greedy scan; shared by the closure and single-shot evaluation."""

    def __init__(self, spec: QuotaChoiceSpec, groups: list[tuple[int, int]]):
        self.q = spec.quota
        self.group_quotas = [qn for _, qn in groups]
        # For each preference position: (bit, indices of groups containing it)
        self.steps = [
            (1 << i, tuple(g for g, (m, _) in enumerate(groups) if m >> i & 1))
            for i in spec.preference
        ]

    def run(self, mask: int, record: list[int] | None = None) -> int:
        chosen = 0
        count = 0
        used = [0] * len(self.group_quotas)
        quotas = self.group_quotas
        for bit, gs in self.steps:
            if count >= self.q:
                if record is None:
                    break
            elif mask & bit and all(used[g] < quotas[g] for g in gs):
                chosen |= bit
                count += 1
                for g in gs:
                    used[g] += 1
            if record is not None:
                record.append(chosen)
        return chosen


def _compile(spec: QuotaChoiceSpec, allow_overlapping_groups: bool) -> tuple[_QuotaRule, bool]:
    groups = normalized_groups(spec)
    overlaps = _overlaps(groups)
    if overlaps and not allow_overlapping_groups:
        a, b = overlaps[0]
        ga = spec.universe.from_mask(groups[a][0])
        gb = spec.universe.from_mask(groups[b][0])
        raise OverlappingGroupsError(
            f"quota groups {ga!r} and {gb!r} overlap; with overlapping groups the "
            "greedy rule is consistent but not revealing in general "
            "(e.g. groups {a,b} and {b,c} with quotas 1, total quota 2, a > b > c "
            "choose {b} from {b,c} but {a,c} from {a,b,c}); "
            "pass allow_overlapping_groups to build it anyway"
        )
    return _QuotaRule(spec, groups), bool(overlaps)


def build_quota_choice(
    spec: QuotaChoiceSpec,
    allow_overlapping_groups: bool = False,
    *,
    name: str = "C",
) -> ChoiceFunction:
    """Greedy quota choice map.

    Contracts are scanned in preference order; one is accepted when offered,
    while fewer than the global quota have been accepted, and while every group
    containing it is below its own quota. Disjoint groups make the map
    revealing; overlapping groups (opt-in) only keep it consistent.
    """
    rule, overlapping = _compile(spec, allow_overlapping_groups)
    if overlapping:
        return ChoiceFunction(
            spec.universe,
            rule.run,
            name=name,
            guarantees=("consistent", "idempotent"),
            note="consistent, not guaranteed revealing",
        )
    return ChoiceFunction(spec.universe, rule.run, name=name, guarantees=REVEALING_FAMILY)


def quota_choose(
    spec: QuotaChoiceSpec,
    offered: ContractSet,
    allow_overlapping_groups: bool = False,
) -> ContractSet:
    spec.universe.check(offered.universe)
    rule, _ = _compile(spec, allow_overlapping_groups)
    return spec.universe.from_mask(rule.run(offered.mask))


def quota_recursion(
    spec: QuotaChoiceSpec,
    offered: ContractSet,
    allow_overlapping_groups: bool = False,
) -> list[ContractSet]:
    """Intermediate accepted sets ``C_0 <= C_1 <= ... <= C(A)``, one per preference entry."""
    spec.universe.check(offered.universe)
    rule, _ = _compile(spec, allow_overlapping_groups)
    record = [0]
    rule.run(offered.mask, record)
    return [spec.universe.from_mask(m) for m in record]


def acceptable_filter(
    universe: ContractUniverse,
    acceptable: Iterable[str | int] | None = None,
    *,
    name: str = "C",
) -> ChoiceFunction:
    """``A -> A & Y``; with no ``acceptable`` argument this is the identity map."""
    y = universe.full_mask if acceptable is None else universe.set(acceptable).mask
    return ChoiceFunction(universe, lambda m: m & y, name=name, guarantees=REVEALING_FAMILY)


def combine_partition(
    children: Sequence[tuple[ContractSet, ChoiceFunction]],
    *,
    name: str = "C",
) -> ChoiceFunction:
    """``C(A) = union of C_i(A & X_i) & X_i`` over a partition ``{X_i}`` of the universe.

    The combined map has exactly the properties shared by all children.
    """
    if not children:
        raise SpecError("partition needs at least one block")
    universe = children[0][0].universe
    covered = 0
    for i, (block, child) in enumerate(children):
        universe.check(block.universe)
        universe.check(child.universe)
        if covered & block.mask:
            raise SpecError(
                f"blocks overlap on {universe.from_mask(covered & block.mask)!r} (block {i})"
            )
        covered |= block.mask
    if covered != universe.full_mask:
        gap = universe.from_mask(universe.full_mask & ~covered)
        raise SpecError(f"blocks do not cover the universe; missing {gap!r}")

    parts = [(block.mask, child) for block, child in children]

    def evaluate(mask: int) -> int:
        out = 0
        for block, child in parts:
            out |= child.choose_mask(mask & block) & block
        return out

    guarantees = frozenset.intersection(*(child.guarantees for _, child in children))
    return ChoiceFunction(universe, evaluate, name=name, guarantees=guarantees)


def _parse_key(universe: ContractUniverse, key) -> int:
    if isinstance(key, ContractSet):
        universe.check(key.universe)
        return key.mask
    if isinstance(key, int):
        return key
    return universe.set(key).mask


@dataclass(frozen=True)
class TableChoiceSpec:
    """An explicit choice map: one entry per subset of a small universe.

    Keys and values may be ContractSets, masks, or iterables of labels.
    """

    universe: ContractUniverse
    table: Mapping = field(default_factory=dict)

    def masks(self) -> list[int]:
        n = self.universe.size
        if n > TABLE_CAP:
            raise CapExceededError(
                f"table choice maps are limited to {TABLE_CAP} contracts, got {n}"
            )
        out: list[int | None] = [None] * (1 << n)
        for key, value in self.table.items():
            a = _parse_key(self.universe, key)
            if not 0 <= a < len(out):
                raise SpecError(f"table key {key!r} is not a subset of the universe")
            out[a] = _parse_key(self.universe, value)
        for a, c in enumerate(out):
            offered = self.universe.from_mask(a)
            if c is None:
                raise SpecError(f"table has no entry for {offered!r}")
            if c & ~a:
                raise NotAChoiceMapError(
                    f"table entry for {offered!r} chooses {self.universe.from_mask(c)!r}, "
                    "which is not a subset"
                )
        return out


def build_table_choice(spec: TableChoiceSpec, *, name: str = "C") -> ChoiceFunction:
    values = spec.masks()
    return ChoiceFunction(spec.universe, values.__getitem__, name=name)


def table_of(choice: ChoiceFunction) -> list[int]:
    """All outputs of ``choice`` indexed by the offered mask."""
    n = choice.universe.size
    if n > 20:
        raise CapExceededError(f"refusing to tabulate a choice map on {n} contracts")
    return [choice.choose_mask(a) for a in range(1 << n)]


__all__ = [
    "OverlappingGroupsError",
    "QuotaChoiceSpec",
    "TableChoiceSpec",
    "acceptable_filter",
    "build_quota_choice",
    "build_table_choice",
    "combine_partition",
    "effective_groups",
    "normalized_groups",
    "quota_choose",
    "quota_recursion",
    "table_of",
]
