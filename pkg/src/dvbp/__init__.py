"""Data reduction toolkit for dynamic vector bin packing (DVBP).

Pack time-interval requests with d-dimensional integer demands into a minimum
number of identical bins so that every bin respects the capacity vector at
every time instant.  This package provides exact time compression, a
(1+eps)-approximate deletion rule with provable solution lifting, diagnostic
bounds, exact small-instance solvers, ILP model export, trace ingestion, an
estimator-style API, and a CLI (``dvbp``).
"""

from .bounds import (
    Metrics,
    bin_budget,
    lower_bound,
    upper_bound_removable,
    utilization,
)
from .estimators import GreedyReducer, HeuristicPacker, TimeCompressor, check_instance
from .exact import GuardRailError, brute_force_opt, dp_feasible, export_ilp
from .ingest import (
    IngestError,
    IngestReport,
    ParseError,
    TraceSchema,
    ingest_trace,
    load_canonical,
    load_schema,
    save_canonical,
)
from .model import (
    ActiveProfile,
    Instance,
    InstanceStats,
    Request,
    TypeEntry,
    TypeTable,
    ValidationError,
    compute_stats,
    group_types,
    validate_instance,
)
from .packing import (
    FeasibilityReport,
    Packing,
    Violation,
    greedy_pack_bin,
    heuristic_solve,
    priority,
    verify_packing,
)
from .reduction import (
    LiftError,
    ReductionCertificate,
    certificate_from_json,
    certificate_to_json,
    lift_solution,
    reduce_instance,
)
from .timeline import TimeMap, compress_time, intersection_matrix

__version__ = "0.1.0"

__all__ = [
    "ActiveProfile",
    "FeasibilityReport",
    "GreedyReducer",
    "GuardRailError",
    "HeuristicPacker",
    "IngestError",
    "IngestReport",
    "Instance",
    "InstanceStats",
    "LiftError",
    "Metrics",
    "Packing",
    "ParseError",
    "ReductionCertificate",
    "Request",
    "TimeCompressor",
    "TimeMap",
    "TraceSchema",
    "TypeEntry",
    "TypeTable",
    "ValidationError",
    "Violation",
    "bin_budget",
    "brute_force_opt",
    "certificate_from_json",
    "certificate_to_json",
    "check_instance",
    "compress_time",
    "compute_stats",
    "dp_feasible",
    "export_ilp",
    "greedy_pack_bin",
    "group_types",
    "heuristic_solve",
    "ingest_trace",
    "intersection_matrix",
    "lift_solution",
    "load_canonical",
    "load_schema",
    "lower_bound",
    "priority",
    "reduce_instance",
    "save_canonical",
    "upper_bound_removable",
    "utilization",
    "validate_instance",
    "verify_packing",
]
