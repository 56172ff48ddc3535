"""Command-line driver: ``schedmatch solve|verify|classify|enumerate|trace``.

Exit codes: 0 success, 1 usage or input error, 2 verification failed,
3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .analysis import CLASSIFY_CAP, classify, enumerate_stable, is_stable
from .core import CapExceededError, ContractSet, SchedMatchError
from .documents import Market, compile_document, corpus_names, load_problem
from .render import (
    dumps,
    format_set,
    outcome_to_json,
    render_outcome,
    render_report,
    render_trace_csv,
    render_trace_table,
    render_verdict,
)
from .schedule import contract_label, interpret_hours
from .solver import ALTERNATING, FIRM, PAIR, WORKER, solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_CAP = 3
AUTO_DEFINITIONAL_LIMIT = 10


class UsageError(Exception):
    pass


def _load(source: str) -> Market:
    try:
        doc = load_problem(source)
    except FileNotFoundError:
        raise UsageError(
            f"{source}: no such file or bundled problem (bundled: {', '.join(corpus_names())})"
        ) from None
    return compile_document(doc)


def _read_set(market: Market, path: str) -> ContractSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, list):
        raise UsageError(f"{path}: expected a JSON list of contracts")
    labels = []
    for i, item in enumerate(data):
        if isinstance(item, str):
            labels.append(item)
        elif isinstance(item, list) and len(item) == 3 and all(isinstance(x, str) for x in item):
            labels.append(contract_label(*item))
        else:
            raise UsageError(f"{path}[{i}]: expected a label or a [worker, firm, day] triple")
    try:
        return market.universe.set(labels)
    except KeyError as exc:
        raise UsageError(f"{path}: unknown contract {exc.args[0]}") from None


def _sides(side: str) -> list[str]:
    return [WORKER, FIRM] if side == "both" else [side]


def cmd_solve(args) -> int:
    market = _load(args.input)
    results = []
    for side in _sides(args.side):
        outcome = solve(
            market.worker_choice,
            market.firm_choice,
            side,
            args.style,
            check_revealing=args.check_revealing,
        )
        hours = interpret_hours(outcome.stable_set, market.hours) if market.hours else None
        results.append((outcome, hours))
    if args.format == "json":
        data = [outcome_to_json(o, market.compiled, h) for o, h in results]
        sys.stdout.write(dumps(data[0] if len(data) == 1 else data))
    else:
        sys.stdout.write("".join(render_outcome(o, market.compiled, h) for o, h in results))
    return EXIT_OK


def cmd_verify(args) -> int:
    market = _load(args.input)
    s = _read_set(market, args.set)
    verdict = is_stable(market.worker_choice, market.firm_choice, s, args.method)
    if args.format == "json":
        sys.stdout.write(
            dumps(
                {
                    "stable": verdict.stable,
                    "method": verdict.method,
                    "set": s.labels(),
                    "witness_worker": verdict.witness_worker.labels() if verdict.stable else None,
                    "witness_firm": verdict.witness_firm.labels() if verdict.stable else None,
                    "reason": verdict.reason,
                }
            )
        )
    else:
        sys.stdout.write(f"S = {format_set(s)}\n" + render_verdict(verdict))
    if args.expect_stable and not verdict.stable:
        return EXIT_UNSTABLE
    return EXIT_OK


def cmd_classify(args) -> int:
    market = _load(args.input)
    if args.map == "worker":
        choice = market.worker_choice
    elif args.map == "firm":
        choice = market.firm_choice
    elif args.map in market.maps:
        choice = market.maps[args.map]
    else:
        names = ["worker", "firm", *market.maps]
        raise UsageError(f"unknown map {args.map!r}; choose from {', '.join(names)}")
    budget = args.budget
    if budget == "exhaustive":
        samples = None
    elif budget.startswith("sampled:") and budget[8:].isdigit() and int(budget[8:]) > 0:
        samples = int(budget[8:])
    else:
        raise UsageError(f"--budget must be 'exhaustive' or 'sampled:N', not {budget!r}")
    if samples is None and choice.universe.size > CLASSIFY_CAP:
        raise CapExceededError(
            f"exhaustive classification is limited to {CLASSIFY_CAP} contracts "
            f"(got {choice.universe.size}); try --budget sampled:2000"
        )
    report = classify(choice, samples, seed=args.seed)
    if args.format == "json":
        data = {
            "map": args.map,
            "mode": report.mode,
            "properties": {
                p: {
                    "status": v.status,
                    "witness": None if v.witness is None else [w.labels() for w in v.witness],
                }
                for p, v in report.as_dict().items()
            },
        }
        sys.stdout.write(dumps(data))
    else:
        sys.stdout.write(render_report(args.map, report))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    market = _load(args.input)
    n = market.universe.size
    method = args.method
    if method == "auto":
        method = "definitional" if n <= AUTO_DEFINITIONAL_LIMIT else "revealing-fast"
    sets = enumerate_stable(market.worker_choice, market.firm_choice, method, cap=args.cap)
    if args.format == "json":
        sys.stdout.write(dumps({"method": method, "stable_sets": [s.labels() for s in sets]}))
        return EXIT_OK
    lines = [f"{len(sets)} stable set{'s' if len(sets) != 1 else ''} ({method})"]
    for s in sets:
        lines.append(f"  {format_set(s)}")
        if market.compiled is not None:
            lines.append("    schedule: " + " ".join(market.compiled.schedule(s)))
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_trace(args) -> int:
    market = _load(args.input)
    outcome = solve(market.worker_choice, market.firm_choice, args.side, args.style)
    if args.format == "csv":
        sys.stdout.write(render_trace_csv(outcome, market.compiled))
    elif args.format == "json":
        sys.stdout.write(dumps(outcome_to_json(outcome, market.compiled)))
    else:
        sys.stdout.write(render_trace_table(outcome, market.compiled))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schedmatch",
        description="Stable sets of contracts for two-sided schedule-matching markets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, func, formats=("text", "json")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True, help="problem file or bundled problem name")
        p.add_argument("--format", choices=formats, default=formats[0])
        p.set_defaults(func=func)
        return p

    p = add("solve", "compute worker- and/or firm-optimal stable sets", cmd_solve)
    p.add_argument("--side", choices=["worker", "firm", "both"], default="both")
    p.add_argument("--style", choices=[PAIR, ALTERNATING], default=PAIR)
    p.add_argument("--check-revealing", action="store_true",
                   help="classify maps without a revealing guarantee before trusting the result")

    p = add("verify", "check whether a given set is stable", cmd_verify)
    p.add_argument("--set", required=True, help="JSON list of labels or [worker, firm, day] triples")
    p.add_argument("--method", choices=["definitional", "consistent", "revealing"],
                   default="definitional")
    p.add_argument("--expect-stable", action="store_true", help="exit with status 2 if unstable")

    p = add("classify", "report the properties of one choice map", cmd_classify)
    p.add_argument("--map", default="worker", help="worker, firm, or a named map of the document")
    p.add_argument("--budget", default="exhaustive", help="exhaustive or sampled:N")
    p.add_argument("--seed", type=int, default=0)

    p = add("enumerate", "list every stable set of a small instance", cmd_enumerate)
    p.add_argument("--cap", type=int, default=None, help="largest universe to enumerate")
    p.add_argument("--method", choices=["auto", "definitional", "consistent-witness",
                                        "revealing-fast"], default="auto")

    p = add("trace", "print the iteration table", cmd_trace, ("table", "csv", "json"))
    p.add_argument("--side", choices=["worker", "firm"], default="worker")
    p.add_argument("--style", choices=[PAIR, ALTERNATING], default=ALTERNATING)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"schedmatch: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, SchedMatchError, ValueError) as exc:
        print(f"schedmatch: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
