"""Ground truth at desk scale.

Two independent exact routes plus the first-order bounding technique:

* exact_by_states walks all 2^m component states, classifies each by
  terminal connectivity (its own union-find, not the BFS the rest of the
  package uses), and accumulates probability and net boundary flux.
* exact_by_inclusion_exclusion expands over all nonempty subsets of a
  minimal-cutset list, so it is capped at N <= 20 clauses.
* first_order_bounds keeps only the singleton and pairwise terms and
  reports how many decimal places the two bounds share.

Sums are accumulated with math.fsum: the inclusion-exclusion series
alternates and cancels badly at small p, and the failure frequency needs
six significant figures down around 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_FLOOR, Decimal

import numpy as np

from .cutsets import CutsetCollection
from .errors import CapExceededError
from .system import ReliabilitySystem

STATE_CAP = 25
SUBSET_CAP = 20

# Matched-decimals search stops here when the bounds agree exactly; a double
# carries no information past about 17 significant digits anyway.
MATCH_DEPTH_CAP = 50


def exact_by_states(sys: ReliabilitySystem) -> tuple[float, float]:
    """Exact (failure probability, failure frequency) by state enumeration.

    A state's flux is sum(mu_i, i down) - sum(lam_i, i up); summing that
    over failed states gives the failure frequency because transitions
    between two failed states cancel in pairs.
    """
    m = sys.m
    if m > STATE_CAP:
        raise CapExceededError(f"state enumeration needs m <= {STATE_CAP}; got {m}")
    n = sys.n
    edge_index = sys.edge_index
    term_idx = [sys._index[t] for t in sys.terminals]
    ps = [float(x) for x in sys.ps]
    lams = [float(x) for x in sys.lams]
    mus = [float(x) for x in sys.mus]
    lam_total = math.fsum(lams)
    # flux(state) = sum over down components of (mu_i + lam_i), minus the
    # constant lam_total.
    rate_sum = [mus[i] + lams[i] for i in range(m)]

    prob_terms = []
    freq_terms = []
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for state in range(1 << m):
        for i in range(n):
            parent[i] = i
        for ci in range(m):
            if not (state >> ci) & 1:
                ui, vi = edge_index[ci]
                parent[find(ui)] = find(vi)
        root = find(term_idx[0])
        if all(find(t) == root for t in term_idx[1:]):
            continue
        prob = 1.0
        flux = -lam_total
        for ci in range(m):
            if (state >> ci) & 1:
                prob *= ps[ci]
                flux += rate_sum[ci]
            else:
                prob *= 1.0 - ps[ci]
        prob_terms.append(prob)
        freq_terms.append(prob * flux)
    return math.fsum(prob_terms), math.fsum(freq_terms)


def _union_masks(clause_masks: list[int]) -> list[int]:
    """Union bitmask for every nonempty subset of clauses, indexed by the
    subset's own bitmask (entry 0 unused)."""
    nsub = 1 << len(clause_masks)
    unions = [0] * nsub
    for t, cm in enumerate(clause_masks):
        block = 1 << t
        for s in range(block):
            unions[block | s] = unions[s] | cm
    return unions


def exact_by_inclusion_exclusion(
    cutsets: CutsetCollection, sys: ReliabilitySystem
) -> tuple[float, float, float]:
    """Exact (P_f, F_f, P) from a complete minimal-cutset list.

    Every nonempty subset I of cutsets contributes sign * p(union(I)) to the
    failure probability, the same term scaled by the union's total repair
    rate to the frequency, and scaled by (1 - that rate / total repair rate)
    to the auxiliary probability P that pairs with the frequency identity
    F_f = (P_f - P) * total repair rate.
    """
    N = cutsets.count
    if N > SUBSET_CAP:
        raise CapExceededError(f"inclusion-exclusion needs N <= {SUBSET_CAP}; got {N}")
    if N == 0:
        return 0.0, 0.0, 0.0
    clause_masks = [c.bitmask() for c in cutsets.cutsets]
    unions = _union_masks(clause_masks)
    mu_total = math.fsum(float(x) for x in sys.mus)
    ws = sys.ws
    mus = sys.mus

    pf_terms = []
    ff_terms = []
    paux_terms = []
    for t in range(1, 1 << N):
        u = unions[t]
        w = 0.0
        musum = 0.0
        mask = u
        while mask:
            b = (mask & -mask).bit_length() - 1
            w += ws[b]
            musum += mus[b]
            mask &= mask - 1
        sign = 1.0 if bin(t).count("1") & 1 else -1.0
        pu = math.exp(-w)
        pf_terms.append(sign * pu)
        ff_terms.append(sign * pu * musum)
        paux_terms.append(sign * pu * (1.0 - musum / mu_total))
    return math.fsum(pf_terms), math.fsum(ff_terms), math.fsum(paux_terms)


@dataclass(frozen=True)
class FirstOrderBounds:
    """lower <= truth <= upper, with matched_decimals the number of decimal
    places on which the two agree and truncated the shared truncation
    (None when they agree on no decimal place)."""

    lower: float
    upper: float
    matched_decimals: int
    truncated: float | None


def truncate_decimal(x: float, places: int) -> float:
    """floor(10^places * x) / 10^places, computed exactly."""
    d = Decimal(x).scaleb(places).to_integral_value(rounding=ROUND_FLOOR)
    return float(d.scaleb(-places))


def _matched_decimals(lower: float, upper: float) -> int:
    """Largest d with floor(10^d * upper) == floor(10^d * lower), after
    widening each bound by one ulp so float noise cannot overstate the
    agreement. Decimal comparisons are exact, so the search is reliable."""
    lo = Decimal(math.nextafter(lower, -math.inf))
    hi = Decimal(math.nextafter(upper, math.inf))
    d = 0
    while d < MATCH_DEPTH_CAP:
        nxt = d + 1
        if lo.scaleb(nxt).to_integral_value(rounding=ROUND_FLOOR) != hi.scaleb(
            nxt
        ).to_integral_value(rounding=ROUND_FLOOR):
            break
        d = nxt
    return d


def _bounds_from_sums(upper: float, pair_sum: float) -> FirstOrderBounds:
    lower = upper - pair_sum
    d = _matched_decimals(lower, upper)
    truncated = truncate_decimal(lower, d) if d > 0 else None
    return FirstOrderBounds(lower, upper, d, truncated)


def first_order_bounds(
    cutsets: CutsetCollection, sys: ReliabilitySystem
) -> tuple[FirstOrderBounds, FirstOrderBounds]:
    """(bounds for failure probability, bounds for failure frequency).

    Upper bounds are the singleton sums over cutsets; lower bounds subtract
    the pairwise union sums. The frequency terms carry the factor
    sum(mu_i, i in the clause or pair union).
    """
    clauses = cutsets.cutsets
    if not clauses:
        raise ValueError("first_order_bounds needs at least one cutset")
    ws = sys.ws
    mus = sys.mus
    masks = [c.bitmask() for c in clauses]

    def mask_stats(mask: int) -> tuple[float, float]:
        w = 0.0
        musum = 0.0
        while mask:
            b = (mask & -mask).bit_length() - 1
            w += ws[b]
            musum += mus[b]
            mask &= mask - 1
        return w, musum

    p_up = []
    f_up = []
    for c in clauses:
        musum = math.fsum(mus[i - 1] for i in c.members)
        p_up.append(c.prob)
        f_up.append(c.prob * musum)
    p_pair = []
    f_pair = []
    for a in range(len(clauses)):
        for b in range(a + 1, len(clauses)):
            w, musum = mask_stats(masks[a] | masks[b])
            pu = math.exp(-w)
            p_pair.append(pu)
            f_pair.append(pu * musum)
    pf = _bounds_from_sums(math.fsum(p_up), math.fsum(p_pair))
    ff = _bounds_from_sums(math.fsum(f_up), math.fsum(f_pair))
    return pf, ff
