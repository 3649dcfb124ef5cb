"""Minimal cutset machinery.

A cutset is a component set whose joint failure disconnects some terminal
pair; it is minimal when no proper subset is also a cutset. Weight is the
sum of member weights w_i = -ln p_i, so the probability that every member
is down at once is exp(-weight).

Three enumerators live here. enumerate_minimal_cutsets walks subsets by
increasing size and is exact but only viable for small m. min_cut finds one
globally minimum-weight cut of an all-terminal system via Stoer-Wagner.
enumerate_near_min repeats randomized edge contraction to collect, with high
probability, every minimal cutset whose weight is within a given ratio of
the minimum; that guarantee also only exists for all-terminal systems.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import CapExceededError, InputError
from .system import ReliabilitySystem

BRUTE_FORCE_CAP = 25
DEFAULT_RUN_BUDGET = 10_000_000

# Relative slack for comparing sums of floats against weight bounds. Uniform
# systems put many cutsets exactly on the bound, so strict comparison would
# drop them on a 1-ulp difference.
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Cutset:
    """Sorted 1-based member ids with their total weight and joint
    unavailability prob = exp(-weight)."""

    members: tuple
    weight: float
    prob: float

    @property
    def size(self) -> int:
        return len(self.members)

    def bitmask(self) -> int:
        mask = 0
        for i in self.members:
            mask |= 1 << (i - 1)
        return mask


def make_cutset(sys: ReliabilitySystem, members) -> Cutset:
    ms = tuple(sorted(members))
    weight = math.fsum(sys.ws[i - 1] for i in ms)
    return Cutset(ms, weight, math.exp(-weight))


@dataclass
class CutsetCollection:
    """Deduplicated cutsets in (weight, members) order plus their extremes:
    min_weight, max_prob = exp(-min_weight), and min_size."""

    cutsets: tuple
    min_weight: float
    max_prob: float
    min_size: int

    @property
    def count(self) -> int:
        return len(self.cutsets)

    @classmethod
    def build(cls, cutsets) -> "CutsetCollection":
        seen = {}
        for cs in cutsets:
            if cs.members not in seen:
                seen[cs.members] = cs
        ordered = tuple(sorted(seen.values(), key=lambda c: (c.weight, c.members)))
        if not ordered:
            return cls(ordered, math.inf, 0.0, 0)
        min_weight = min(c.weight for c in ordered)
        min_size = min(c.size for c in ordered)
        return cls(ordered, min_weight, math.exp(-min_weight), min_size)

    def jsonl(self) -> str:
        """One JSON object per cutset, for audit logs."""
        lines = [
            json.dumps({"members": list(c.members), "weight": c.weight, "prob": c.prob})
            for c in self.cutsets
        ]
        return "\n".join(lines)


def _mask_of(sys: ReliabilitySystem, members) -> int:
    mask = 0
    for i in members:
        if not 1 <= i <= sys.m:
            raise InputError(f"component id out of range: {i}")
        mask |= 1 << (i - 1)
    return mask


def is_cutset(sys: ReliabilitySystem, members) -> bool:
    """True iff taking every member down disconnects some terminal pair."""
    return not sys.connected_without(_mask_of(sys, members))


def is_minimal(sys: ReliabilitySystem, members) -> bool:
    """True iff members is a cutset and dropping any single member leaves a
    non-cutset. For a cutset this single-removal test implies full
    minimality: any proper subset extends to a single-removal subset."""
    mask = _mask_of(sys, members)
    if sys.connected_without(mask):
        return False
    for i in members:
        if not sys.connected_without(mask & ~(1 << (i - 1))):
            return False
    return True


def enumerate_minimal_cutsets(
    sys: ReliabilitySystem,
    max_weight: float | None = None,
    cap: int = BRUTE_FORCE_CAP,
) -> CutsetCollection:
    """All minimal cutsets, exactly, by subset enumeration.

    Walks subsets in increasing cardinality. A candidate that contains an
    already-found minimal cutset is skipped, so every admitted cutset is
    minimal by construction. With max_weight given, only cutsets of weight
    <= max_weight (within WEIGHT_TOL relative slack) are returned.
    """
    if sys.m > cap:
        raise CapExceededError(
            f"brute-force enumeration needs m <= {cap}; system has m = {sys.m}"
        )
    bound = None if max_weight is None else max_weight * (1.0 + WEIGHT_TOL)
    ws = sys.ws
    ids = range(1, sys.m + 1)
    found = []
    found_masks = []
    for size in range(1, sys.m + 1):
        for combo in itertools.combinations(ids, size):
            mask = 0
            for i in combo:
                mask |= 1 << (i - 1)
            if any(fm & mask == fm for fm in found_masks):
                continue
            if bound is not None and math.fsum(ws[i - 1] for i in combo) > bound:
                continue
            if not sys.connected_without(mask):
                found.append(make_cutset(sys, combo))
                found_masks.append(mask)
    return CutsetCollection.build(found)


def min_cut(sys: ReliabilitySystem) -> Cutset:
    """One minimum-weight cut of an all-terminal system (Stoer-Wagner).

    The returned cutset is minimal automatically: a minimum-weight side that
    was internally disconnected would yield a strictly lighter cut.
    """
    if not sys.all_terminal:
        raise InputError("min_cut requires an all-terminal system")
    if sys.m == 1:
        return make_cutset(sys, (1,))
    g = nx.Graph()
    g.add_nodes_from(range(sys.n))
    for ci, (ui, vi) in enumerate(sys.edge_index):
        w = float(sys.ws[ci])
        if g.has_edge(ui, vi):
            g[ui][vi]["weight"] += w
        else:
            g.add_edge(ui, vi, weight=w)
    _, (side_a, _) = nx.stoer_wagner(g)
    in_a = set(side_a)
    members = [
        ci + 1
        for ci, (ui, vi) in enumerate(sys.edge_index)
        if (ui in in_a) != (vi in in_a)
    ]
    return make_cutset(sys, members)


def contraction_run(sys: ReliabilitySystem, ratio: float, rng) -> Cutset | None:
    """One randomized contraction pass over an all-terminal system.

    Repeatedly picks a live component with probability proportional to its
    weight and merges its endpoints, until ceil(2 * ratio) meta-nodes remain
    (components internal to a meta-node stop being live). Then draws a
    uniformly random nonempty proper bipartition of the meta-nodes and
    returns the original components crossing it, or None when that cut is
    not a minimal cutset.

    The minimality filter checks that removing the cut splits the graph into
    exactly two connected pieces. For a bipartition cut the two are
    equivalent: a side that falls apart contains a lighter sub-cut, and when
    both sides hold together every member bridges them.
    """
    if not sys.all_terminal:
        raise InputError("contraction requires an all-terminal system")
    if ratio < 1.0:
        raise InputError(f"contraction ratio must be >= 1; got {ratio}")
    target = max(2, math.ceil(2.0 * ratio))
    n = sys.n
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    eu = [ui for ui, _ in sys.edge_index]
    ev = [vi for _, vi in sys.edge_index]
    # plain lists: the per-step arrays are tiny, so numpy overhead dominates
    ws = sys.ws.tolist()
    live = list(range(sys.m))
    remaining = n
    while remaining > target:
        total = 0.0
        for c in live:
            total += ws[c]
        x = rng.random() * total
        ci = live[-1]
        for c in live:
            x -= ws[c]
            if x < 0.0:
                ci = c
                break
        parent[find(eu[ci])] = find(ev[ci])
        remaining -= 1
        live = [c for c in live if find(eu[c]) != find(ev[c])]

    roots = sorted({find(x) for x in range(n)})
    nblocks = len(roots)
    # Fix the first block on side 0; a nonzero pick over the rest then
    # ranges over exactly the 2^(B-1) - 1 unordered proper bipartitions.
    pick = int(rng.integers(1, 1 << (nblocks - 1)))
    side = {}
    for b, r in enumerate(roots[1:]):
        side[r] = (pick >> b) & 1
    side[roots[0]] = 0
    members = [
        c + 1 for c in live if side[find(eu[c])] != side[find(ev[c])]
    ]
    mask = 0
    for i in members:
        mask |= 1 << (i - 1)
    if _count_components_without(sys, mask) != 2:
        return None
    return make_cutset(sys, members)


def _count_components_without(sys: ReliabilitySystem, down_mask: int) -> int:
    seen = bytearray(sys.n)
    adj = sys._adj
    count = 0
    for start in range(sys.n):
        if seen[start]:
            continue
        count += 1
        if count > 2:
            return count
        seen[start] = 1
        stack = [start]
        while stack:
            x = stack.pop()
            for nbr, ci in adj[x]:
                if not seen[nbr] and not (down_mask >> ci) & 1:
                    seen[nbr] = 1
                    stack.append(nbr)
    return count


def contraction_run_count(n: int, ratio: float, confidence: float) -> int:
    """Number of contraction passes for completeness probability
    1 - n^(-confidence): ceil(n^(2*ratio) * ln(n^(2*ratio + confidence)))."""
    reps = n ** (2.0 * ratio)
    return math.ceil(reps * math.log(n ** (2.0 * ratio + confidence)))


def enumerate_near_min(
    sys: ReliabilitySystem,
    ratio: float,
    confidence: float = 2.0,
    rng=None,
    run_budget: int = DEFAULT_RUN_BUDGET,
) -> CutsetCollection:
    """Minimal cutsets of weight <= ratio * min_weight, via repeated
    contraction. All-terminal systems only.

    With the full run count the result is complete with probability at least
    1 - n^(-confidence). When that count exceeds run_budget it is truncated
    to the budget and a warning notes that the guarantee is forfeited. The
    Stoer-Wagner cut is always included; it both defines min_weight and
    keeps the collection nonempty.
    """
    rng = np.random.default_rng(rng)
    base = min_cut(sys)
    bound = ratio * base.weight * (1.0 + WEIGHT_TOL)
    runs = contraction_run_count(sys.n, ratio, confidence)
    if runs > run_budget:
        warnings.warn(
            f"contraction run count {runs} exceeds budget {run_budget}; "
            "truncating, so the completeness guarantee is forfeited",
            stacklevel=2,
        )
        runs = run_budget
    collected = {base.members: base}
    for _ in range(runs):
        cs = contraction_run(sys, ratio, rng)
        if cs is not None and cs.weight <= bound and cs.members not in collected:
            collected[cs.members] = cs
    return CutsetCollection.build(collected.values())
