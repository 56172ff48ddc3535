"""Acceptance criteria 1-7, each checked at its stated tolerance and time limit.

Run ``pytest tests/test_acceptance.py -s`` (or execute this file) to see one
PASS/FAIL line per criterion.
"""

import itertools
import random
import sys
import time

import pytest

from schedmatch import (
    ContractUniverse,
    TableChoiceSpec,
    build_table_choice,
    classify,
    compile_document,
    enumerate_fixed_points,
    enumerate_stable,
    is_stable,
    load_problem,
    replay,
    solve,
)
from schedmatch.solver import pair_leq

from helpers import labels, random_quota_map, random_table_map


def load(name):
    return compile_document(load_problem(name))


def codes(market, items):
    return market.compiled.set_of([(f"w{c[0]}", f"f{c[1]}", f"d{c[2]}") for c in items])


def alternating_table(market, side):
    out = solve(market.worker_choice, market.firm_choice, side, "alternating")
    cols = [(s.column, s.members) for s in out.trace.steps] + [("S", out.stable_set)]
    return out, cols


def check_table(market, side, expected_cols, expected):
    out, cols = alternating_table(market, side)
    problems = []
    if [c for c, _ in cols] != expected_cols:
        problems.append(f"columns {[c for c, _ in cols]}")
    for (name, members), want in zip(cols, expected):
        if members != want:
            problems.append(f"column {name} differs")
    return out, problems


# ------------------------------------------------------------------ criteria


def criterion_1():
    m = load("section4_jobmarket")
    full = m.universe.full
    x2 = full - codes(m, ["111", "221", "331"])
    s = codes(m, ["112", "121", "222", "231", "311", "332"])
    expected = [
        full,
        codes(m, ["111", "112", "221", "222", "331", "332"]),
        x2,
        codes(m, ["111", "112", "121", "221", "222", "231", "311", "331", "332"]),
        x2,
        s,
    ]
    out, problems = check_table(m, "worker", ["X_0", "Y_1", "X_2", "Y_3", "X_4", "S"], expected)
    if out.stable_set != s:
        problems.append("S differs")
    return not problems, "; ".join(problems) or "S and all five iterate columns match, X_2 = X_4"


def criterion_2():
    m = load("section4_jobmarket")
    full = m.universe.full
    y2 = full - codes(m, ["132", "212", "322"])
    s = codes(m, ["122", "131", "211", "232", "312", "321"])
    expected = [
        full,
        codes(m, ["122", "132", "212", "232", "312", "322"]),
        y2,
        codes(m, ["122", "131", "132", "211", "212", "232", "312", "321", "322"]),
        y2,
        s,
    ]
    out, problems = check_table(m, "firm", ["Y_0", "X_1", "Y_2", "X_3", "Y_4", "S"], expected)
    if out.stable_set != s:
        problems.append("S differs")
    return not problems, "; ".join(problems) or "S and all five iterate columns match, Y_2 = Y_4"


def criterion_3():
    m = load("gale_shapley_1962")
    c = m.compiled
    first = c.set_of([("w1", "f1", "d1"), ("w2", "f2", "d1"), ("w3", "f3", "d1")])
    men = c.set_of([("w1", "f3", "d1"), ("w2", "f1", "d1"), ("w3", "f2", "d1")])
    second = c.set_of([("w1", "f2", "d1"), ("w2", "f3", "d1"), ("w3", "f1", "d1")])
    sets = enumerate_stable(m.worker_choice, m.firm_choice)
    ok = set(sets) == {first, men, second} and len(sets) == 3
    ok &= solve(m.worker_choice, m.firm_choice, "worker").stable_set == first
    ok &= solve(m.worker_choice, m.firm_choice, "firm").stable_set == men
    return ok, f"{len(sets)} stable sets; worker-optimal and firm-optimal checked"


PUBLISHED = {
    ("problem1", "worker"): ["(w1,f2,d1-d4)", "(w2,f1,d1-d3)", "(w3,f2,d2-d3)", "(w4,f2,d1-d7)"],
    ("problem2", "worker"): ["(w1,f2,d1-d4)", "(w2,f1,d1-d3)", "(w3,f2,d2-d5)", "(w4,f2,d1-d7)"],
    ("problem3", "worker"): ["(w1,f3,d1-d4)", "(w2,f1,d1-d3)", "(w3,f2,d2-d3)",
                             "(w4,f2,d1,d4-d7)", "(w4,f3,d2-d3)"],
    ("problem4", "worker"): ["(w1,f2,d2-d4)", "(w1,f3,d1)", "(w2,f1,d1-d2)", "(w2,f2,d3)",
                             "(w3,f2,d2-d3)", "(w4,f2,d5-d7)", "(w4,f3,d1-d4)"],
    ("problem4", "firm"): ["(w1,f2,d5-d7)", "(w1,f3,d1)", "(w2,f1,d1-d2)", "(w2,f2,d3)",
                           "(w3,f2,d2-d3)", "(w4,f2,d5-d7)", "(w4,f3,d1-d4)"],
}
for _p in ("problem1", "problem2", "problem3"):
    PUBLISHED[(_p, "firm")] = PUBLISHED[(_p, "worker")]


def criterion_4():
    mismatches = []
    for name in ("problem1", "problem2", "problem3", "problem4"):
        m = load(name)
        for side in ("worker", "firm"):
            got = m.compiled.schedule(solve(m.worker_choice, m.firm_choice, side).stable_set)
            if got != PUBLISHED[(name, side)]:
                mismatches.append(f"{name} {side}: got {' '.join(got)}")
    return not mismatches, "; ".join(mismatches) or "all eight schedules match"


def criterion_5():
    notes = []
    m = load("example_3_12")
    c, u = m.worker_choice, m.universe
    ok = c(u.set("bc")) == u.set("b") and c(u.full) == u.set("ac")
    rev = classify(c).is_revealing
    ok &= not rev.ok and replay(c, "revealing", rev.witness)
    for name in ("example_6_3a", "example_6_3b", "example_6_5"):
        e = load(name)
        if enumerate_stable(e.worker_choice, e.firm_choice):
            ok = False
            notes.append(f"{name} has a stable set")
    table = {
        "C1": (True, True, True, True),
        "C2": (False, False, True, True),
        "C3": (False, True, False, True),
        "C4": (False, False, False, False),
    }
    maps = load("example_6_1").maps
    for name, want in table.items():
        r = classify(maps[name])
        got = (r.is_revealing.ok, r.is_consistent.ok, r.is_persistent.ok, r.is_idempotent.ok)
        if got != want:
            ok = False
            notes.append(f"{name} verdicts {got}")
    r5 = classify(load("example_6_1b").maps["C5"])
    ok &= r5.is_idempotent.ok and not r5.is_consistent.ok and not r5.is_persistent.ok
    return ok, "; ".join(notes) or "all counterexample values and verdicts reproduce"


def criterion_6():
    rng = random.Random(2024)
    failures = []
    for _ in range(500):
        u = ContractUniverse(labels(rng.randint(1, 8)))
        c, _ = random_quota_map(rng, u)
        if not classify(c).is_revealing.ok:
            failures.append("disjoint spec not revealing")
    for _ in range(200):
        u = ContractUniverse(labels(rng.randint(1, 8)))
        c, _ = random_quota_map(rng, u, overlapping=True)
        if not classify(c).is_consistent.ok:
            failures.append("overlapping spec not consistent")
    for _ in range(200):
        u = ContractUniverse(labels(rng.randint(1, 8)))
        cw, _ = random_quota_map(rng, u, "C_W")
        cf, _ = random_quota_map(rng, u, "C_F")
        for side in ("worker", "firm"):
            pair = solve(cw, cf, side)
            if solve(cw, cf, side, "alternating").stable_set != pair.stable_set:
                failures.append("styles disagree")
            if not all(is_stable(cw, cf, pair.stable_set, m).stable
                       for m in ("definitional", "consistent", "revealing")):
                failures.append("solver output unstable")
        for s in u.subsets():
            verdicts = {is_stable(cw, cf, s, m).stable
                        for m in ("definitional", "consistent", "revealing")}
            if len(verdicts) != 1:
                failures.append(f"methods disagree on {s!r}")
    u2 = ContractUniverse(["a", "b"])
    options = [[m for m in range(4) if m & ~a == 0] for a in range(4)]
    tables = [build_table_choice(TableChoiceSpec(u2, dict(enumerate(v))))
              for v in itertools.product(*options)]
    u3 = ContractUniverse(["a", "b", "c"])
    tables += [random_table_map(rng, u3) for _ in range(500)]
    for c in tables:
        r = classify(c)
        rev, con, per, idem = (r.is_revealing.ok, r.is_consistent.ok,
                               r.is_persistent.ok, r.is_idempotent.ok)
        if rev != (con and per) or per != r.rejection_monotone.ok or ((con or per) and not idem):
            failures.append("classifier equivalence broken")
    return not failures, (
        f"{len(failures)} failures, first: {failures[0]}" if failures
        else f"500 + 200 specs, 200 markets, {len(tables)} tables"
    )


def criterion_7():
    rng = random.Random(77)
    bad = 0
    for _ in range(50):
        u = ContractUniverse(labels(rng.randint(1, 8)))
        cw, _ = random_quota_map(rng, u)
        cf, _ = random_quota_map(rng, u)
        points = enumerate_fixed_points(cw, cf)
        top = solve(cw, cf, "worker")
        low = solve(cw, cf, "firm")
        hi = (top.witness_worker, top.witness_firm)
        lo = (low.witness_worker, low.witness_firm)
        if hi not in points or lo not in points:
            bad += 1
        elif not all(pair_leq(p, hi) and pair_leq(lo, p) for p in points):
            bad += 1
    return bad == 0, f"{50 - bad}/50 instances extremal"


CRITERIA = {
    1: (criterion_1, 1.0),
    2: (criterion_2, 1.0),
    3: (criterion_3, 1.0),
    4: (criterion_4, 5.0),
    5: (criterion_5, None),
    6: (criterion_6, 60.0),
    7: (criterion_7, 30.0),
}


REPORT: dict[int, str] = {}


def evaluate(number):
    func, limit = CRITERIA[number]
    start = time.perf_counter()
    ok, detail = func()
    elapsed = time.perf_counter() - start
    in_time = limit is None or elapsed < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    budget = f" / limit {limit:.0f} s" if limit else ""
    if not in_time:
        detail += "; over the time limit"
    line = f"criterion {number}: {verdict} ({elapsed:.2f} s{budget}) {detail}"
    print(line)
    REPORT[number] = line
    return ok and in_time, line


@pytest.mark.parametrize("number", [1, 2, 3, 5, 6, 7])
def test_criterion(number):
    ok, line = evaluate(number)
    assert ok, line


@pytest.mark.xfail(
    strict=True,
    reason="the published firm-side schedule of the fourth seven-day problem is blocked "
    "by (w1,f3,d2) under its stated preferences; see tests/test_schedule.py",
)
def test_criterion_4():
    ok, line = evaluate(4)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n)[0] for n in CRITERIA]
    sys.exit(0 if all(results) else 1)
