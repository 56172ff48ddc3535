"""Stable sets of contracts for two-sided schedule-matching markets."""

from .analysis import (
    PropertyReport,
    PropertyVerdict,
    StabilityVerdict,
    classify,
    enumerate_stable,
    find_blocker,
    is_individually_rational,
    is_stable,
    replay,
)
from .choicemaps import (
    OverlappingGroupsError,
    QuotaChoiceSpec,
    TableChoiceSpec,
    acceptable_filter,
    build_quota_choice,
    build_table_choice,
    combine_partition,
    quota_choose,
    quota_recursion,
)
from .core import (
    CapExceededError,
    ChoiceFunction,
    ContractSet,
    ContractUniverse,
    DuplicateLabelError,
    NotAChoiceMapError,
    PreconditionError,
    SchedMatchError,
    SpecError,
    UniverseMismatchError,
    make_universe,
    rejection,
)
from .documents import (
    ProblemParseError,
    compile_document,
    load_problem,
    parse_problem,
    render_problem,
)
from .schedule import (
    AgentSpec,
    CompiledMarket,
    HoursEncoding,
    ScheduleProblem,
    build_market,
    compile_agent,
    expand_hours,
    interpret_hours,
)
from .solver import (
    ConvergenceError,
    IterationTrace,
    SolveOutcome,
    enumerate_fixed_points,
    solve,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "AgentSpec",
    "CapExceededError",
    "ChoiceFunction",
    "CompiledMarket",
    "ContractSet",
    "ContractUniverse",
    "ConvergenceError",
    "DuplicateLabelError",
    "HoursEncoding",
    "IterationTrace",
    "NotAChoiceMapError",
    "OverlappingGroupsError",
    "PreconditionError",
    "ProblemParseError",
    "PropertyReport",
    "PropertyVerdict",
    "QuotaChoiceSpec",
    "ScheduleProblem",
    "SchedMatchError",
    "SolveOutcome",
    "SpecError",
    "StabilityVerdict",
    "TableChoiceSpec",
    "UniverseMismatchError",
    "acceptable_filter",
    "build_market",
    "build_quota_choice",
    "build_table_choice",
    "classify",
    "combine_partition",
    "compile_agent",
    "compile_document",
    "enumerate_fixed_points",
    "enumerate_stable",
    "expand_hours",
    "find_blocker",
    "interpret_hours",
    "is_individually_rational",
    "is_stable",
    "load_problem",
    "make_universe",
    "parse_problem",
    "quota_choose",
    "quota_recursion",
    "rejection",
    "render_problem",
    "replay",
    "solve",
    "step",
]
