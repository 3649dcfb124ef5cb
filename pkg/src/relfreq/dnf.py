"""Karp-Luby-Madras estimation of weighted DNF truth probabilities.

Clauses come from minimal cutsets: clause j is true when every member of
cutset j is unavailable and, when the instance carries an exposure literal,
the single exposed component lies outside the cutset. The exposed component
models which repair completes next; it is drawn with probability
proportional to its repair rate.

The estimator draws a clause proportional to its probability, draws an
assignment conditioned on that clause being true, and scores
prob_sum / N(z) where N(z) counts the clauses the assignment satisfies.
Batch means over S trials are taken, and the lower median of T batches is
returned; with S = ceil(4(M-1)/xi^2) and T = ceil(12 ln(1/delta)) that is a
multiplicative (xi, delta)-approximation.

Two execution paths produce the same distribution. The generic path
simulates every trial. The fast path applies when all components share one
p and one mu and no clause contains another: an assignment with no
unavailable components beyond the selected clause then satisfies exactly
that clause, so such trials score prob_sum / 1 with no per-trial work, and
only trials with extra failures (a ~ m*p fraction) are simulated. Per batch
it draws the clause-size histogram from a multinomial, splits each size
class binomially into clean and dirty trials, and simulates the dirty ones
vectorized.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .cutsets import CutsetCollection
from .errors import EstimationError, InputError
from .system import ReliabilitySystem


@dataclass(frozen=True)
class DnfClause:
    members: tuple
    prob: float


@dataclass(frozen=True)
class DnfInstance:
    """Weighted DNF over m components. prob_sum is the estimator's scaling
    constant: the sum of clause probabilities."""

    clauses: tuple
    exposure: bool
    m: int
    ps: np.ndarray
    mus: np.ndarray
    mu_total: float
    prob_sum: float

    @property
    def clause_count(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class Assignment:
    """unavailable[i-1] says component i is down; exposed is a component id
    (exposure instances) or None."""

    unavailable: tuple
    exposed: int | None = None


@dataclass(frozen=True)
class EstimatorParams:
    xi: float
    delta: float
    S: int
    T: int
    seed: object = None


@dataclass(frozen=True)
class Estimate:
    value: float
    error_mode: str
    epsilon: float
    delta: float
    samples: int
    elapsed: float


def estimator_params(M: int, xi: float, delta: float, seed=None) -> EstimatorParams:
    """S = ceil(4(M-1)/xi^2) inner trials (1 when M = 1, where the estimator
    is exact) and T = ceil(12 ln(1/delta)) outer batches."""
    if M < 1:
        raise InputError(f"need at least one clause; got M = {M}")
    if xi <= 0.0:
        raise InputError(f"xi must be positive; got {xi}")
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must lie in (0, 1); got {delta}")
    S = max(1, math.ceil(4.0 * (M - 1) / (xi * xi)))
    T = max(1, math.ceil(12.0 * math.log(1.0 / delta)))
    return EstimatorParams(xi=xi, delta=delta, S=S, T=T, seed=seed)


def _instance(cutsets: CutsetCollection, sys: ReliabilitySystem, exposure: bool) -> DnfInstance:
    if cutsets.count == 0:
        raise InputError("cannot build a DNF from an empty cutset collection")
    mu_total = math.fsum(float(x) for x in sys.mus)
    clauses = []
    for c in cutsets.cutsets:
        prob = c.prob
        if exposure:
            mu_members = math.fsum(float(sys.mus[i - 1]) for i in c.members)
            prob *= 1.0 - mu_members / mu_total
        clauses.append(DnfClause(c.members, prob))
    return DnfInstance(
        clauses=tuple(clauses),
        exposure=exposure,
        m=sys.m,
        ps=sys.ps.copy(),
        mus=sys.mus.copy(),
        mu_total=mu_total,
        prob_sum=math.fsum(cl.prob for cl in clauses),
    )


def make_dnf(ps, mus, clauses, exposure: bool = False) -> DnfInstance:
    """Free-standing instance over components 1..m with unavailabilities ps
    and repair rates mus. Each clause is an iterable of member ids."""
    ps = np.asarray(ps, dtype=float)
    mus = np.asarray(mus, dtype=float)
    if ps.ndim != 1 or ps.shape != mus.shape or ps.size == 0:
        raise InputError("ps and mus must be equal-length nonempty vectors")
    if np.any(ps <= 0.0) or np.any(ps >= 1.0):
        raise InputError("component unavailabilities must lie in (0, 1)")
    if np.any(mus <= 0.0):
        raise InputError("repair rates must be positive")
    m = ps.size
    mu_total = math.fsum(float(x) for x in mus)
    built = []
    for raw in clauses:
        members = tuple(sorted(set(int(i) for i in raw)))
        if not members or members[0] < 1 or members[-1] > m:
            raise InputError(f"clause members must be a nonempty subset of 1..{m}")
        prob = math.exp(math.fsum(math.log(float(ps[i - 1])) for i in members))
        if exposure:
            mu_members = math.fsum(float(mus[i - 1]) for i in members)
            prob *= 1.0 - mu_members / mu_total
        built.append(DnfClause(members, prob))
    if not built:
        raise InputError("cannot build a DNF with no clauses")
    return DnfInstance(
        clauses=tuple(built),
        exposure=exposure,
        m=m,
        ps=ps.copy(),
        mus=mus.copy(),
        mu_total=mu_total,
        prob_sum=math.fsum(cl.prob for cl in built),
    )


def build_failure_dnf(cutsets: CutsetCollection, sys: ReliabilitySystem) -> DnfInstance:
    """DNF whose truth probability is the failure probability: clause j is
    true iff every member of cutset j is unavailable."""
    return _instance(cutsets, sys, exposure=False)


def build_exposure_dnf(cutsets: CutsetCollection, sys: ReliabilitySystem) -> DnfInstance:
    """DNF with the exposure literal. Its truth probability is the quantity
    P with (failure probability - P) * mu_total = failure frequency: clause
    j additionally requires the exposed component to lie outside cutset j,
    which happens with probability 1 - sum(mu over members) / mu_total."""
    return _instance(cutsets, sys, exposure=True)


def count_satisfied(dnf: DnfInstance, a: Assignment) -> int:
    """Number of clauses the assignment satisfies."""
    if len(a.unavailable) != dnf.m:
        raise InputError("assignment does not match component count")
    if dnf.exposure != (a.exposed is not None):
        raise InputError("assignment exposure does not match instance")
    count = 0
    for cl in dnf.clauses:
        if all(a.unavailable[i - 1] for i in cl.members):
            if a.exposed is None or a.exposed not in cl.members:
                count += 1
    return count


def _member_bool(dnf: DnfInstance, clauses) -> np.ndarray:
    out = np.zeros((len(clauses), dnf.m), dtype=bool)
    for j, cl in enumerate(clauses):
        for i in cl.members:
            out[j, i - 1] = True
    return out


def _is_antichain(clauses) -> bool:
    masks = []
    for cl in clauses:
        mask = 0
        for i in cl.members:
            mask |= 1 << (i - 1)
        masks.append(mask)
    for a in range(len(masks)):
        for b in range(len(masks)):
            if a != b and masks[a] & masks[b] == masks[a]:
                return False
    return True


def klm_estimate(
    dnf: DnfInstance,
    params: EstimatorParams,
    rng=None,
    trace=None,
    _force_generic: bool = False,
) -> Estimate:
    """(xi, delta)-approximation of the DNF's truth probability.

    Reproducible for a fixed seed. trace, when given, receives
    (clause index, N(z), score) per trial and forces the generic path.
    """
    started = time.perf_counter()
    if dnf.clause_count < 1:
        raise EstimationError("formula has no clauses")
    rng = np.random.default_rng(rng if rng is not None else params.seed)

    active = [cl for cl in dnf.clauses if cl.prob > 0.0]
    if not active:
        raise EstimationError("formula almost surely false: every clause has probability zero")

    use_fast = (
        not _force_generic
        and trace is None
        and bool(np.all(dnf.ps == dnf.ps[0]))
        and bool(np.all(dnf.mus == dnf.mus[0]))
        and _is_antichain(dnf.clauses)
    )
    if use_fast:
        batch_means = _run_fast(dnf, active, params, rng)
    else:
        batch_means = _run_generic(dnf, active, params, rng, trace)

    batch_means.sort()
    value = float(batch_means[(params.T - 1) // 2])
    return Estimate(
        value=value,
        error_mode="multiplicative",
        epsilon=params.xi,
        delta=params.delta,
        samples=params.S * params.T,
        elapsed=time.perf_counter() - started,
    )


def _run_generic(dnf, active, params, rng, trace):
    """Simulate every trial. Memory is bounded by processing each batch in
    chunks; the trial stream is identical regardless of chunk size."""
    S, T = params.S, params.T
    m = dnf.m
    q_z = dnf.prob_sum
    probs = np.array([cl.prob for cl in active])
    cum = np.cumsum(probs)
    memb_active = _member_bool(dnf, active)
    memb_all = _member_bool(dnf, dnf.clauses)
    ps_row = dnf.ps[None, :]
    chunk_cap = 1 << 16

    means = np.empty(T)
    for t in range(T):
        total = 0.0
        done = 0
        while done < S:
            nc = min(chunk_cap, S - done)
            done += nc
            u = rng.random(nc) * cum[-1]
            sel = np.minimum(np.searchsorted(cum, u, side="right"), len(active) - 1)
            down = rng.random((nc, m)) < ps_row
            down |= memb_active[sel]
            if dnf.exposure:
                wts = np.where(memb_active[sel], 0.0, dnf.mus[None, :])
                cw = np.cumsum(wts, axis=1)
                ue = rng.random(nc) * cw[:, -1]
                exposed = (ue[:, None] < cw).argmax(axis=1)
            else:
                exposed = None
            nsat = np.zeros(nc, dtype=np.int64)
            for k, cl in enumerate(dnf.clauses):
                cols = [i - 1 for i in cl.members]
                sat = down[:, cols].all(axis=1)
                if exposed is not None:
                    sat &= ~memb_all[k][exposed]
                nsat += sat
            scores = q_z / nsat
            total += float(scores.sum())
            if trace is not None:
                for a in range(nc):
                    trace(int(sel[a]), int(nsat[a]), float(scores[a]))
        means[t] = total / S
    return means


def _run_fast(dnf, active, params, rng):
    """Uniform-p, uniform-mu, antichain path.

    Every trial whose assignment has no unavailable components beyond the
    selected clause satisfies exactly that clause (no other clause fits
    inside it, and the exposed component is outside it by construction), so
    it scores prob_sum exactly. Only within-class clause identity matters
    for the rest, and clause probabilities are equal within a size class,
    so the batch reduces to: multinomial counts per size class, a binomial
    clean/dirty split per class, and honest simulation of the dirty trials.
    """
    S, T = params.S, params.T
    m = dnf.m
    q_z = dnf.prob_sum
    p = float(dnf.ps[0])

    by_size: dict[int, list[int]] = {}
    for j, cl in enumerate(active):
        by_size.setdefault(len(cl.members), []).append(j)
    sizes = sorted(by_size)
    memb_active = _member_bool(dnf, active)
    memb_all = _member_bool(dnf, dnf.clauses)

    class_clauses = []   # clause index arrays, one per class
    class_nonmem = []    # non-member component indices per clause, per class
    class_pvals = []
    class_pdirty = []
    class_xcdf = []      # cdf of the extra-failure count, conditioned on >= 1
    for s in sizes:
        idx = np.array(by_size[s], dtype=np.int64)
        class_clauses.append(idx)
        nonmem = np.array(
            [[i for i in range(m) if not memb_active[j, i]] for j in idx],
            dtype=np.int64,
        ).reshape(len(idx), m - s)
        class_nonmem.append(nonmem)
        class_pvals.append(math.fsum(active[j].prob for j in idx))
        r = m - s
        if r == 0:
            class_pdirty.append(0.0)
            class_xcdf.append(np.zeros(0))
            continue
        pd = -math.expm1(r * math.log1p(-p))
        class_pdirty.append(pd)
        pmf = np.array(
            [math.comb(r, k) * p**k * (1.0 - p) ** (r - k) for k in range(1, r + 1)]
        )
        class_xcdf.append(np.cumsum(pmf / pmf.sum()))
    pvals = np.array(class_pvals)
    pvals = pvals / pvals.sum()

    means = np.empty(T)
    for t in range(T):
        counts = rng.multinomial(S, pvals)
        total = 0.0
        down_rows = []
        exp_rows = []
        for c, s in enumerate(sizes):
            n_total = int(counts[c])
            if n_total == 0:
                continue
            r = m - s
            if r == 0:
                total += n_total * q_z
                continue
            n_dirty = int(rng.binomial(n_total, class_pdirty[c]))
            total += (n_total - n_dirty) * q_z
            if n_dirty == 0:
                continue
            which = rng.integers(0, len(class_clauses[c]), n_dirty)
            extras = np.searchsorted(class_xcdf[c], rng.random(n_dirty)) + 1
            order = np.argsort(rng.random((n_dirty, r)), axis=1)
            down = memb_active[class_clauses[c][which]].copy()
            keep = np.arange(r)[None, :] < extras[:, None]
            rows = np.repeat(np.arange(n_dirty), extras)
            cols = class_nonmem[c][which.repeat(extras), order[keep]]
            down[rows, cols] = True
            down_rows.append(down)
            if dnf.exposure:
                pick = rng.integers(0, r, n_dirty)
                exp_rows.append(class_nonmem[c][which, pick])
        if down_rows:
            down = np.concatenate(down_rows)
            exposed = np.concatenate(exp_rows) if dnf.exposure else None
            nsat = np.zeros(len(down), dtype=np.int64)
            for k, cl in enumerate(dnf.clauses):
                cols = [i - 1 for i in cl.members]
                sat = down[:, cols].all(axis=1)
                if exposed is not None:
                    sat &= ~memb_all[k][exposed]
                nsat += sat
            total += float((q_z / nsat).sum())
        means[t] = total / S
    return means
