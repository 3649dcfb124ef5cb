"""Steady-state failure probability and frequency of repairable networks."""

__version__ = "0.1.0"

from .approx import (
    AllTerminalPlan,
    ApproxOutcome,
    ExhaustivePlan,
    approx_ff_all_terminal,
    approx_ff_exhaustive,
    approx_pf_exhaustive,
    plan_all_terminal,
    plan_exhaustive,
    planned_samples,
    run_all_terminal,
    run_exhaustive,
)
from .cutsets import (
    Cutset,
    CutsetCollection,
    contraction_run_count,
    enumerate_minimal_cutsets,
    enumerate_near_min,
    is_cutset,
    is_minimal,
    make_cutset,
    min_cut,
)
from .dnf import (
    Assignment,
    DnfClause,
    DnfInstance,
    Estimate,
    EstimatorParams,
    build_exposure_dnf,
    build_failure_dnf,
    count_satisfied,
    estimator_params,
    klm_estimate,
    make_dnf,
)
from .errors import CapExceededError, EstimationError, InputError, PlanInvalidError
from .exact import (
    FirstOrderBounds,
    exact_by_inclusion_exclusion,
    exact_by_states,
    first_order_bounds,
    truncate_decimal,
)
from .mcs import McsResult, mcs_additive_params, mcs_multiplicative_params, mcs_run
from .system import (
    Component,
    ReliabilitySystem,
    SystemStats,
    grid_system,
    load_system,
    merge_parallel,
    system_stats,
    to_document,
)

__all__ = [
    "AllTerminalPlan",
    "ApproxOutcome",
    "Assignment",
    "CapExceededError",
    "Component",
    "Cutset",
    "CutsetCollection",
    "DnfClause",
    "DnfInstance",
    "Estimate",
    "EstimationError",
    "EstimatorParams",
    "ExhaustivePlan",
    "FirstOrderBounds",
    "InputError",
    "McsResult",
    "PlanInvalidError",
    "ReliabilitySystem",
    "SystemStats",
    "approx_ff_all_terminal",
    "approx_ff_exhaustive",
    "approx_pf_exhaustive",
    "build_exposure_dnf",
    "build_failure_dnf",
    "contraction_run_count",
    "count_satisfied",
    "enumerate_minimal_cutsets",
    "enumerate_near_min",
    "estimator_params",
    "exact_by_inclusion_exclusion",
    "exact_by_states",
    "first_order_bounds",
    "grid_system",
    "is_cutset",
    "is_minimal",
    "klm_estimate",
    "load_system",
    "make_cutset",
    "make_dnf",
    "mcs_additive_params",
    "mcs_multiplicative_params",
    "mcs_run",
    "merge_parallel",
    "min_cut",
    "plan_all_terminal",
    "plan_exhaustive",
    "planned_samples",
    "run_all_terminal",
    "run_exhaustive",
    "system_stats",
    "to_document",
    "truncate_decimal",
    "__version__",
]
