"""Random instance builders shared by the property and acceptance tests."""

import random

from schedmatch import ContractUniverse, QuotaChoiceSpec, build_quota_choice
from schedmatch.choicemaps import TableChoiceSpec, build_table_choice


def labels(n):
    return [f"x{i}" for i in range(n)]


def random_quota_spec(rng: random.Random, universe: ContractUniverse, overlapping=False):
    n = universe.size
    pref = rng.sample(range(n), rng.randint(0, n))
    q = rng.choice([None, rng.randint(0, n)])
    groups = []
    if overlapping:
        for _ in range(rng.randint(2, 4)):
            members = rng.sample(range(n), rng.randint(1, n))
            groups.append((universe.set(members), rng.randint(0, 3)))
    else:
        pool = list(range(n))
        rng.shuffle(pool)
        while pool and rng.random() < 0.8:
            k = rng.randint(1, len(pool))
            block, pool = pool[:k], pool[k:]
            groups.append((universe.set(block), rng.randint(0, k)))
    return QuotaChoiceSpec(universe, tuple(pref), q, tuple(groups))


def random_quota_map(rng, universe, name="C", overlapping=False):
    spec = random_quota_spec(rng, universe, overlapping)
    return build_quota_choice(spec, overlapping, name=name), spec


def random_table_map(rng, universe, name="C"):
    table = {}
    for a in range(1 << universe.size):
        table[a] = a & rng.randrange(1 << universe.size) if a else 0
    return build_table_choice(TableChoiceSpec(universe, table), name=name)


def as_frozen(choice):
    """Wrap a ChoiceFunction as a frozenset-of-labels function for the oracles."""
    u = choice.universe
    return lambda a: frozenset(choice(u.set(a)))
