"""Text, CSV and JSON renderings of solutions and iteration traces."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Sequence

from .analysis import PropertyReport, StabilityVerdict
from .core import ContractSet
from .schedule import CompiledMarket, HoursTable
from .solver import SolveOutcome

MARK = "x"


def format_set(s: ContractSet) -> str:
    return "{" + ", ".join(s) + "}"


def _row_keys(s_universe, market: CompiledMarket | None) -> tuple[list[str], list[list[str]]]:
    if market is not None:
        return ["w", "f", "d"], [list(t) for t in market.triples]
    return ["contract"], [[label] for label in s_universe.labels]


def trace_rows(
    outcome: SolveOutcome, market: CompiledMarket | None = None
) -> tuple[list[str], list[list[str]]]:
    """Header and rows of the trace table: one row per contract, ``x`` marks membership."""
    u = outcome.stable_set.universe
    head, keys = _row_keys(u, market)
    columns = [(s.column, s.members) for s in outcome.trace.steps] + [("S", outcome.stable_set)]
    header = head + [name for name, _ in columns]
    rows = []
    for i, key in enumerate(keys):
        rows.append(key + [MARK if i in members else "" for _, members in columns])
    return header, rows


def render_trace_table(outcome: SolveOutcome, market: CompiledMarket | None = None) -> str:
    header, rows = trace_rows(outcome, market)
    n_keys = 3 if market is not None else 1
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]

    def line(cells: Sequence[str]) -> str:
        parts = []
        for c, cell in enumerate(cells):
            parts.append(cell.ljust(widths[c]) if c < n_keys else cell.center(widths[c]))
        return "  ".join(parts).rstrip()

    rule = "-" * len(line(header))
    out = [line(header), rule]
    for i, row in enumerate(rows):
        # a rule between the blocks of consecutive workers
        if market is not None and i and row[0] != rows[i - 1][0]:
            out.append(rule)
        out.append(line(row))
    return "\n".join(out) + "\n"


def render_trace_csv(outcome: SolveOutcome, market: CompiledMarket | None = None) -> str:
    header, rows = trace_rows(outcome, market)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def outcome_to_json(
    outcome: SolveOutcome,
    market: CompiledMarket | None = None,
    hours: HoursTable | None = None,
) -> dict[str, Any]:
    out: dict[str, Any] = {
        "side": outcome.side,
        "style": outcome.style,
        "status": outcome.status,
        "stable_set": outcome.stable_set.labels(),
        "witness_worker": outcome.witness_worker.labels(),
        "witness_firm": outcome.witness_firm.labels(),
        "iterations": outcome.iterations,
        "trace": {s.column: s.members.labels() for s in outcome.trace.steps},
    }
    if outcome.notes:
        out["notes"] = list(outcome.notes)
    if market is not None:
        out["schedule"] = market.schedule(outcome.stable_set)
    if hours is not None:
        out["hours"] = [
            {"worker": w, "firm": f, "hours": h} for (w, f), h in hours.hours.items() if h
        ]
        out["warnings"] = list(hours.warnings)
    return out


def render_outcome(
    outcome: SolveOutcome,
    market: CompiledMarket | None = None,
    hours: HoursTable | None = None,
) -> str:
    s = outcome.stable_set
    lines = [
        f"{outcome.side}-optimal: {len(s)} contracts after {outcome.iterations} iterations "
        f"[{outcome.status}]",
        f"  S   = {format_set(s)}",
        f"  S_W = {format_set(outcome.witness_worker)}",
        f"  S_F = {format_set(outcome.witness_firm)}",
    ]
    if market is not None and hours is None:
        lines.append("  schedule: " + " ".join(market.schedule(s)))
    if hours is not None:
        lines.append(render_hours(hours).rstrip("\n"))
    lines.extend(f"  note: {n}" for n in outcome.notes)
    return "\n".join(lines) + "\n"


def render_hours(hours: HoursTable) -> str:
    rows = [(w, f, str(h)) for (w, f), h in hours.hours.items() if h]
    lines = ["  hours:"]
    if not rows:
        lines.append("    (none)")
    else:
        ww = max(len(r[0]) for r in rows)
        fw = max(len(r[1]) for r in rows)
        lines.extend(f"    {w:<{ww}}  {f:<{fw}}  {h}" for w, f, h in rows)
    lines.extend(f"  warning: {msg}" for msg in hours.warnings)
    return "\n".join(lines) + "\n"


def render_verdict(v: StabilityVerdict) -> str:
    lines = [f"{'stable' if v.stable else 'unstable'} ({v.method})"]
    if v.stable:
        lines.append(f"  S_W = {format_set(v.witness_worker)}")
        lines.append(f"  S_F = {format_set(v.witness_firm)}")
    else:
        lines.append(f"  reason: {v.reason}")
    return "\n".join(lines) + "\n"


def render_report(name: str, report: PropertyReport) -> str:
    return "\n".join([f"{name} ({report.mode})"] + ["  " + x for x in report.lines()]) + "\n"


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


__all__ = [
    "MARK",
    "dumps",
    "format_set",
    "outcome_to_json",
    "render_hours",
    "render_outcome",
    "render_report",
    "render_trace_csv",
    "render_trace_table",
    "render_verdict",
    "trace_rows",
]
