"""Crude Monte Carlo over the component state space.

Each trial draws every component down independently with its stationary
unavailability, then classifies the state by terminal connectivity. A failed
state scores pi = 1 toward the failure probability and
phi = sum(mu, down) - sum(lam, up) toward the failure frequency; working
states score zero for both. Batch means and the lower median across batches
follow the same convention as the DNF estimator.

Trials are generated component-wise by geometric gap skipping: the trial
indices where one component is down form a Bernoulli process, so consecutive
gaps are iid geometric. At small p this touches ~ S * sum(p_i) array entries
instead of S * m, and the connectivity test runs once per distinct sampled
down set (memoized), not once per trial.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .dnf import Estimate
from .errors import InputError, PlanInvalidError
from .system import ReliabilitySystem

CHUNK_CAP = 1 << 20


@dataclass(frozen=True)
class McsResult:
    pf: Estimate
    ff: Estimate
    no_failure: bool


def mcs_multiplicative_params(sys, epsilon, delta, p_star, rho) -> tuple[int, int]:
    """Trial counts for a multiplicative (epsilon, delta) guarantee:
    S = ceil(mu_total (2 + eps) ln 8 / (p_star rho eps^2)), T = ceil(12 ln(1/delta)).
    Diverges as p_star -> 0, which is what makes small-p systems expensive."""
    if rho <= 0.0:
        raise PlanInvalidError(f"rho must be positive; got {rho}")
    if not 0.0 < p_star < 1.0:
        raise InputError(f"p_star must lie in (0, 1); got {p_star}")
    if epsilon <= 0.0 or not 0.0 < delta < 1.0:
        raise InputError("epsilon must be positive and delta in (0, 1)")
    mu_total = math.fsum(float(x) for x in sys.mus)
    S = math.ceil(mu_total * (2.0 + epsilon) * math.log(8.0) / (p_star * rho * epsilon * epsilon))
    T = math.ceil(12.0 * math.log(1.0 / delta))
    return S, T


def mcs_additive_params(sys, epsilon, delta) -> tuple[int, int]:
    """Trial counts for additive error epsilon on the failure frequency,
    using frequency <= mu_total: S = ceil(mu_total (2 mu_total + eps) ln 8 / eps^2)."""
    if epsilon <= 0.0 or not 0.0 < delta < 1.0:
        raise InputError("epsilon must be positive and delta in (0, 1)")
    mu_total = math.fsum(float(x) for x in sys.mus)
    S = math.ceil(mu_total * (2.0 * mu_total + epsilon) * math.log(8.0) / (epsilon * epsilon))
    T = math.ceil(12.0 * math.log(1.0 / delta))
    return S, T


def _down_positions(rng, length: int, p: float) -> np.ndarray:
    """Sorted trial indices in [0, length) where a p-component is down."""
    if p <= 0.0:
        return np.empty(0, dtype=np.int64)
    out = []
    pos = -1
    block = max(16, int(length * p * 1.25))
    while True:
        gaps = rng.geometric(p, block)
        steps = np.cumsum(gaps) + pos
        if steps[-1] >= length:
            out.append(steps[steps < length])
            break
        out.append(steps)
        pos = int(steps[-1])
    return np.concatenate(out) if len(out) > 1 else out[0]


def mcs_run(
    sys: ReliabilitySystem,
    S: int,
    T: int,
    rng=None,
    error_mode: str = "multiplicative",
    epsilon: float = math.nan,
    delta: float = math.nan,
) -> McsResult:
    """S trials per batch, T batches, lower-median estimates of the failure
    probability and frequency. Never raises on an all-working sample; the
    result carries no_failure = True and zero values instead."""
    if S < 1 or T < 1:
        raise InputError("S and T must be at least 1")
    if sys.m > 63:
        raise InputError("state sampling supports at most 63 components")
    started = time.perf_counter()
    rng = np.random.default_rng(rng)
    m = sys.m
    ps = [float(x) for x in sys.ps]
    lam_total = math.fsum(float(x) for x in sys.lams)
    rate_sum = [float(sys.mus[i]) + float(sys.lams[i]) for i in range(m)]

    # mask -> (failed, flux); a failed state can net to flux 0.0 when rates
    # balance, so the flag is stored, not inferred from the flux.
    state_memo: dict[int, tuple[bool, float]] = {}

    def classify(mask: int) -> tuple[bool, float]:
        got = state_memo.get(mask)
        if got is not None:
            return got
        if sys.connected_without(mask):
            got = (False, 0.0)
        else:
            flux = -lam_total
            b = mask
            while b:
                flux += rate_sum[(b & -b).bit_length() - 1]
                b &= b - 1
            got = (True, flux)
        state_memo[mask] = got
        return got

    pf_means = np.empty(T)
    ff_means = np.empty(T)
    any_failure = False
    for t in range(T):
        fail_count = 0
        flux_sum = 0.0
        done = 0
        while done < S:
            nc = min(CHUNK_CAP, S - done)
            done += nc
            masks = np.zeros(nc, dtype=np.uint64)
            for i in range(m):
                pos = _down_positions(rng, nc, ps[i])
                if len(pos):
                    masks[pos] |= np.uint64(1 << i)
            nz = masks[masks != 0]
            if not len(nz):
                continue
            uniq, counts = np.unique(nz, return_counts=True)
            for mask_u, cnt in zip(uniq, counts):
                failed, flux = classify(int(mask_u))
                if failed:
                    fail_count += int(cnt)
                    flux_sum += flux * int(cnt)
        pf_means[t] = fail_count / S
        ff_means[t] = flux_sum / S
        any_failure = any_failure or fail_count > 0

    pf_means.sort()
    ff_means.sort()
    lower_mid = (T - 1) // 2
    elapsed = time.perf_counter() - started
    pf = Estimate(float(pf_means[lower_mid]), error_mode, epsilon, delta, S * T, elapsed)
    ff = Estimate(float(ff_means[lower_mid]), error_mode, epsilon, delta, S * T, elapsed)
    return McsResult(pf=pf, ff=ff, no_failure=not any_failure)
