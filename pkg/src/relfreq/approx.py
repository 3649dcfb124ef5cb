"""End-to-end failure probability and frequency approximation.

Two routes, both multiplicative (epsilon, delta) on the failure frequency:

* The exhaustive route enumerates every minimal cutset (so it is polynomial
  in their number N), sizes the KLM error as
  klm_error = (epsilon / 2) * (flux_floor / mu_total), and estimates the
  failure DNF and the exposure DNF. The frequency comes out of the identity
  failure frequency = (P_f - P) * mu_total, and the flux floor is what
  turns the additive difference error into a multiplicative one.

* The all-terminal route needs only one Stoer-Wagner cut. When the cut's
  probability is large it hands off to crude Monte Carlo, which is cheap in
  exactly that regime. Otherwise it enumerates the near-minimum cutsets up
  to a computed weight ratio by randomized contraction and runs the same
  two-DNF estimation on those; the neglected heavy cutsets contribute at
  most half the KLM error budget, so each KLM call runs at klm_error / 2.

Plans are separated from runners so the chosen parameters can be inspected
and reported without paying for the estimation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .cutsets import (
    DEFAULT_RUN_BUDGET,
    CutsetCollection,
    enumerate_minimal_cutsets,
    enumerate_near_min,
    min_cut,
)
from .dnf import (
    Estimate,
    build_exposure_dnf,
    build_failure_dnf,
    estimator_params,
    klm_estimate,
)
from .errors import InputError, PlanInvalidError
from .mcs import mcs_multiplicative_params, mcs_run
from .system import ReliabilitySystem, system_stats

DEFAULT_THRESHOLD_EXPONENT = 4.0


def _check_eps_delta(epsilon: float, delta: float) -> None:
    if epsilon <= 0.0:
        raise InputError(f"epsilon must be positive; got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must lie in (0, 1); got {delta}")


def _flux_floor_or_raise(sys: ReliabilitySystem, size: float) -> float:
    floor = system_stats(sys, size).rho
    if floor <= 0.0:
        raise PlanInvalidError(
            "flux floor is not positive (repair rates must dominate failure "
            f"rates: mu_min/lam_max > m - 1); got {floor}"
        )
    return floor


@dataclass(frozen=True)
class ExhaustivePlan:
    """Parameters for the exhaustive (poly in cutset count) route."""

    epsilon: float
    delta: float
    cutsets: CutsetCollection
    min_cut_size: int
    flux_floor: float
    mu_total: float
    klm_error: float
    klm_delta: float


def plan_exhaustive(
    sys: ReliabilitySystem,
    epsilon: float,
    delta: float,
    cutsets: CutsetCollection | None = None,
) -> ExhaustivePlan:
    """Enumerate (or accept) the full minimal-cutset list and size the KLM
    calls. The true minimum cutset size feeds the flux floor."""
    _check_eps_delta(epsilon, delta)
    if cutsets is None:
        cutsets = enumerate_minimal_cutsets(sys)
    mu_total = float(math.fsum(float(x) for x in sys.mus))
    floor = _flux_floor_or_raise(sys, cutsets.min_size)
    return ExhaustivePlan(
        epsilon=epsilon,
        delta=delta,
        cutsets=cutsets,
        min_cut_size=cutsets.min_size,
        flux_floor=floor,
        mu_total=mu_total,
        klm_error=(epsilon / 2.0) * (floor / mu_total),
        klm_delta=delta / 2.0,
    )


@dataclass(frozen=True)
class ApproxOutcome:
    """ff is the headline (epsilon, delta) frequency estimate. pf and
    aux_prob are the two DNF estimates it was assembled from (aux_prob is
    None on the Monte Carlo branch). near_min carries the contracted cutset
    collection on the all-terminal route; no_failure is the Monte Carlo
    branch's all-states-working flag."""

    ff: Estimate
    pf: Estimate
    aux_prob: Estimate | None = None
    near_min: CutsetCollection | None = None
    no_failure: bool = False


def _estimate_pair(sys, cutsets, klm_error, klm_delta, rng) -> tuple[Estimate, Estimate]:
    """(failure DNF estimate, exposure DNF estimate), sharing one stream."""
    failure = build_failure_dnf(cutsets, sys)
    exposure = build_exposure_dnf(cutsets, sys)
    params = estimator_params(cutsets.count, klm_error, klm_delta)
    pf = klm_estimate(failure, params, rng=rng)
    if exposure.prob_sum == 0.0:
        # Every clause has probability zero, so the formula's truth
        # probability is exactly zero; no sampling needed.
        aux = Estimate(0.0, "multiplicative", klm_error, klm_delta, 0, 0.0)
    else:
        aux = klm_estimate(exposure, params, rng=rng)
    return pf, aux


def _assemble_ff(pf: Estimate, aux: Estimate, mu_total, epsilon, delta, elapsed) -> Estimate:
    value = max(0.0, (pf.value - aux.value) * mu_total)
    return Estimate(
        value=value,
        error_mode="multiplicative",
        epsilon=epsilon,
        delta=delta,
        samples=pf.samples + aux.samples,
        elapsed=elapsed,
    )


def run_exhaustive(sys: ReliabilitySystem, plan: ExhaustivePlan, rng=None) -> ApproxOutcome:
    started = time.perf_counter()
    rng = np.random.default_rng(rng)
    pf, aux = _estimate_pair(sys, plan.cutsets, plan.klm_error, plan.klm_delta, rng)
    ff = _assemble_ff(
        pf, aux, plan.mu_total, plan.epsilon, plan.delta, time.perf_counter() - started
    )
    return ApproxOutcome(ff=ff, pf=pf, aux_prob=aux)


def approx_ff_exhaustive(
    sys: ReliabilitySystem,
    epsilon: float,
    delta: float,
    rng=None,
    cutsets: CutsetCollection | None = None,
) -> Estimate:
    """Multiplicative (epsilon, delta)-approximation of the failure
    frequency for any k-terminal system with a positive flux floor."""
    plan = plan_exhaustive(sys, epsilon, delta, cutsets=cutsets)
    return run_exhaustive(sys, plan, rng=rng).ff


def approx_pf_exhaustive(
    sys: ReliabilitySystem,
    epsilon: float,
    delta: float,
    rng=None,
    cutsets: CutsetCollection | None = None,
) -> Estimate:
    """Multiplicative (epsilon, delta)-approximation of the failure
    probability: one KLM run on the failure DNF at full (epsilon, delta).
    No flux floor needed."""
    _check_eps_delta(epsilon, delta)
    if cutsets is None:
        cutsets = enumerate_minimal_cutsets(sys)
    dnf = build_failure_dnf(cutsets, sys)
    params = estimator_params(cutsets.count, epsilon, delta)
    return klm_estimate(dnf, params, rng=rng)


@dataclass(frozen=True)
class AllTerminalPlan:
    """Parameters for the all-terminal route.

    min_cut_prob = n^-(2 + excess) defines excess; ratio is the enumeration
    weight bound as a multiple of min_cut_weight. branch is "mcs" when the
    min cut is probable enough that crude Monte Carlo is cheaper, else
    "near-min". mcs_trials holds that branch's (S, T)."""

    epsilon: float
    delta: float
    branch: str
    threshold_exponent: float
    min_cut_weight: float
    min_cut_prob: float
    min_cut_repair: float
    size_surrogate: float
    flux_floor: float
    mu_total: float
    klm_error: float
    klm_delta: float
    excess: float | None = None
    ratio: float | None = None
    mcs_trials: tuple[int, int] | None = None


def plan_all_terminal(
    sys: ReliabilitySystem,
    epsilon: float,
    delta: float,
    threshold_exponent: float = DEFAULT_THRESHOLD_EXPONENT,
) -> AllTerminalPlan:
    """Size the all-terminal route from one minimum cut.

    The surrogate min{max{min_cut_weight / w_max, 1}, m} replaces the true
    minimum cutset size, which is not available in polynomial time. The
    threshold exponent must exceed 2 so that excess > 0 on the near-min
    branch."""
    _check_eps_delta(epsilon, delta)
    if not sys.all_terminal:
        raise InputError("the all-terminal route requires every node to be a terminal")
    if threshold_exponent <= 2.0:
        raise InputError(
            f"threshold exponent must exceed 2; got {threshold_exponent}"
        )
    base = min_cut(sys)
    weight = base.weight
    prob = base.prob
    repair = math.fsum(float(sys.mus[i - 1]) for i in base.members)
    w_max = float(sys.ws.max())
    surrogate = min(max(weight / w_max, 1.0), float(sys.m))
    floor = _flux_floor_or_raise(sys, surrogate)
    mu_total = float(math.fsum(float(x) for x in sys.mus))
    mu_min = float(sys.mus.min())
    klm_error = (epsilon / 2.0) * (floor / mu_total)
    n = sys.n

    if prob > float(n) ** (-threshold_exponent):
        S, T = mcs_multiplicative_params(sys, epsilon, delta, prob, floor)
        return AllTerminalPlan(
            epsilon=epsilon,
            delta=delta,
            branch="mcs",
            threshold_exponent=threshold_exponent,
            min_cut_weight=weight,
            min_cut_prob=prob,
            min_cut_repair=repair,
            size_surrogate=surrogate,
            flux_floor=floor,
            mu_total=mu_total,
            klm_error=klm_error,
            klm_delta=delta / 2.0,
            mcs_trials=(S, T),
        )

    excess = weight / math.log(n) - 2.0
    if mu_total == repair:
        # The minimum cut uses every component, so it is the only minimal
        # cutset and any ratio >= 1 captures everything.
        ratio = 1.0
    else:
        ratio = (
            1.0
            + 2.0 / excess
            + math.log(
                2.0
                * (excess + 2.0)
                * (mu_total - surrogate * mu_min)
                / (klm_error * excess * (mu_total - repair))
            )
            / (excess * math.log(n))
        )
        ratio = max(ratio, 1.0)
    return AllTerminalPlan(
        epsilon=epsilon,
        delta=delta,
        branch="near-min",
        threshold_exponent=threshold_exponent,
        min_cut_weight=weight,
        min_cut_prob=prob,
        min_cut_repair=repair,
        size_surrogate=surrogate,
        flux_floor=floor,
        mu_total=mu_total,
        klm_error=klm_error,
        klm_delta=delta / 2.0,
        excess=excess,
        ratio=ratio,
    )


def planned_samples(sys: ReliabilitySystem, plan) -> int:
    """Worst-case trial count a plan commits to before any sampling runs.

    Exhaustive plans know their clause count exactly. Near-min plans do not
    know the enumeration's yield yet, so the count bound n^(2 * ratio) is
    used; the actual run then needs at most this many trials."""
    if isinstance(plan, ExhaustivePlan):
        params = estimator_params(plan.cutsets.count, plan.klm_error, plan.klm_delta)
        return 2 * params.S * params.T
    if plan.branch == "mcs":
        S, T = plan.mcs_trials
        return S * T
    clause_bound = math.ceil(float(sys.n) ** (2.0 * plan.ratio))
    params = estimator_params(clause_bound, plan.klm_error / 2.0, plan.klm_delta)
    return 2 * params.S * params.T


def run_all_terminal(
    sys: ReliabilitySystem,
    plan: AllTerminalPlan,
    rng=None,
    confidence: float = 2.0,
    run_budget: int = DEFAULT_RUN_BUDGET,
) -> ApproxOutcome:
    """Execute a plan. On the near-min branch each KLM call runs at half the
    plan's KLM error: the other half of the budget pays for the cutsets the
    enumeration deliberately leaves out."""
    started = time.perf_counter()
    rng = np.random.default_rng(rng)
    if plan.branch == "mcs":
        S, T = plan.mcs_trials
        result = mcs_run(
            sys, S, T, rng=rng,
            error_mode="multiplicative", epsilon=plan.epsilon, delta=plan.delta,
        )
        return ApproxOutcome(
            ff=result.ff, pf=result.pf, no_failure=result.no_failure
        )
    near = enumerate_near_min(
        sys, plan.ratio, confidence=confidence, rng=rng, run_budget=run_budget
    )
    pf, aux = _estimate_pair(sys, near, plan.klm_error / 2.0, plan.klm_delta, rng)
    ff = _assemble_ff(
        pf, aux, plan.mu_total, plan.epsilon, plan.delta, time.perf_counter() - started
    )
    return ApproxOutcome(ff=ff, pf=pf, aux_prob=aux, near_min=near)


def approx_ff_all_terminal(
    sys: ReliabilitySystem,
    epsilon: float,
    delta: float,
    rng=None,
    threshold_exponent: float = DEFAULT_THRESHOLD_EXPONENT,
    confidence: float = 2.0,
    run_budget: int = DEFAULT_RUN_BUDGET,
) -> Estimate:
    """Multiplicative (epsilon, delta)-approximation of the failure
    frequency of an all-terminal system, polynomial in the node count."""
    plan = plan_all_terminal(sys, epsilon, delta, threshold_exponent=threshold_exponent)
    return run_all_terminal(
        sys, plan, rng=rng, confidence=confidence, run_budget=run_budget
    ).ff
