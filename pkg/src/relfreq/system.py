"""Network model: repairable components with stationary failure/repair rates.

A system is a set of nodes, a terminal subset (size >= 2), and components
joining node pairs. Component i fails at rate lam_i and is repaired at rate
mu_i, independently of everything else, so its stationary unavailability is
p_i = lam_i / (lam_i + mu_i) and its weight is w_i = -ln p_i (natural log
throughout). The system is failed whenever the up components do not connect
every terminal to every other.

Parallel components are merged on load: a bundle with unavailabilities p_j and
repair rates mu_j collapses to one component with p = prod p_j and
mu = sum mu_j, which leaves both the failure probability and the failure
frequency of the system unchanged.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError

DOCUMENT_VERSION = 1


@dataclass(frozen=True)
class Component:
    """One repairable link. p and w are always derived from (lam, mu)."""

    id: int
    u: object
    v: object
    lam: float
    mu: float

    @property
    def p(self) -> float:
        return self.lam / (self.lam + self.mu)

    @property
    def w(self) -> float:
        return -math.log(self.p)

    def endpoint_key(self) -> frozenset:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class SystemStats:
    """Aggregate rates. rho depends on the caller-supplied min cutset size."""

    lam_max: float
    mu_min: float
    w_max: float
    lam_total: float
    mu_total: float
    w_total: float
    rho: float


class ReliabilitySystem:
    """Immutable validated system. Construction checks node references,
    positive rates, and that the fully-up graph connects all terminals.
    Parallel components are allowed here; load_system merges them."""

    def __init__(self, nodes, terminals, components, name=None):
        self.nodes = tuple(nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise InputError("duplicate node id")
        self._index = {v: i for i, v in enumerate(self.nodes)}
        terms = []
        for t in terminals:
            if t not in self._index:
                raise InputError(f"unknown node reference in terminals: {t!r}")
            if t not in terms:
                terms.append(t)
        if len(terms) < 2:
            raise InputError("terminal set too small (need at least 2)")
        self.terminals = tuple(terms)
        comps = []
        for i, c in enumerate(components, start=1):
            if c.lam <= 0 or c.mu <= 0:
                raise InputError(f"nonpositive rate on component {c.id}")
            if c.u not in self._index or c.v not in self._index:
                raise InputError(f"unknown node reference on component {c.id}")
            if c.u == c.v:
                raise InputError(f"self-loop on component {c.id}")
            if c.id != i:
                c = Component(i, c.u, c.v, c.lam, c.mu)
            comps.append(c)
        if not comps:
            raise InputError("system has no components")
        self.components = tuple(comps)
        self.name = name

        n, m = len(self.nodes), len(self.components)
        self.edge_index = [(self._index[c.u], self._index[c.v]) for c in self.components]
        adj = [[] for _ in range(n)]
        for ci, (ui, vi) in enumerate(self.edge_index):
            adj[ui].append((vi, ci))
            adj[vi].append((ui, ci))
        self._adj = [tuple(a) for a in adj]
        self._terminal_idx = tuple(self._index[t] for t in self.terminals)
        self._is_terminal = bytearray(n)
        for ti in self._terminal_idx:
            self._is_terminal[ti] = 1

        self.ps = np.array([c.p for c in self.components], dtype=np.float64)
        self.ws = np.array([c.w for c in self.components], dtype=np.float64)
        self.lams = np.array([c.lam for c in self.components], dtype=np.float64)
        self.mus = np.array([c.mu for c in self.components], dtype=np.float64)

        if not self.connected_without(0):
            raise InputError("terminals disconnected even with all components up")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def k(self) -> int:
        return len(self.terminals)

    @property
    def all_terminal(self) -> bool:
        return self.k == self.n

    def connected_without(self, down_mask: int) -> bool:
        """True iff all terminals stay connected when the components whose
        bits are set in down_mask are removed."""
        seen = bytearray(self.n)
        start = self._terminal_idx[0]
        seen[start] = 1
        remaining = self.k - 1
        if remaining == 0:
            return True
        stack = [start]
        adj = self._adj
        is_term = self._is_terminal
        while stack:
            x = stack.pop()
            for nbr, ci in adj[x]:
                if not seen[nbr] and not (down_mask >> ci) & 1:
                    seen[nbr] = 1
                    if is_term[nbr]:
                        remaining -= 1
                        if remaining == 0:
                            return True
                    stack.append(nbr)
        return remaining == 0

    def __eq__(self, other):
        if not isinstance(other, ReliabilitySystem):
            return NotImplemented
        return (self.nodes == other.nodes
                and self.terminals == other.terminals
                and self.components == other.components)

    def __hash__(self):
        return hash((self.nodes, self.terminals, self.components))

    def __repr__(self):
        label = self.name or "system"
        return f"<ReliabilitySystem {label}: n={self.n} k={self.k} m={self.m}>"


def merge_parallel(sys: ReliabilitySystem) -> ReliabilitySystem:
    """Collapse every parallel bundle into one equivalent component.

    The merged component gets p = prod p_j and mu = sum mu_j, hence
    lam = p * mu / (1 - p). Component ids are renumbered contiguously in
    order of each bundle's first appearance. Idempotent.
    """
    groups: dict[frozenset, list[Component]] = {}
    order = []
    for c in sys.components:
        key = c.endpoint_key()
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(c)
    merged = []
    for key in order:
        bundle = groups[key]
        if len(bundle) == 1:
            c = bundle[0]
            merged.append(Component(len(merged) + 1, c.u, c.v, c.lam, c.mu))
            continue
        p = math.exp(math.fsum(math.log(c.p) for c in bundle))
        mu = math.fsum(c.mu for c in bundle)
        lam = p * mu / (1.0 - p)
        first = bundle[0]
        merged.append(Component(len(merged) + 1, first.u, first.v, lam, mu))
    return ReliabilitySystem(sys.nodes, sys.terminals, merged, name=sys.name)


def system_stats(sys: ReliabilitySystem, s_star) -> SystemStats:
    """Aggregate rate statistics. s_star may be the true minimum cutset size
    or the all-terminal surrogate, and may be fractional in the latter case;
    rho = mu_min * s_star - lam_max * (m - s_star)."""
    if not 1 <= s_star <= sys.m:
        raise ValueError(f"s_star must lie in [1, m]; got {s_star}")
    lam_max = float(sys.lams.max())
    mu_min = float(sys.mus.min())
    return SystemStats(
        lam_max=lam_max,
        mu_min=mu_min,
        w_max=float(sys.ws.max()),
        lam_total=float(math.fsum(sys.lams)),
        mu_total=float(math.fsum(sys.mus)),
        w_total=float(math.fsum(sys.ws)),
        rho=mu_min * s_star - lam_max * (sys.m - s_star),
    )


def rate_margin_ok(sys: ReliabilitySystem) -> bool:
    """mu_min / lam_max > m - 1, the margin that makes rho positive for any
    s_star >= 1. Violations are allowed for exact oracles, so loading only
    warns; plan builders raise PlanInvalidError when rho <= 0."""
    if sys.m == 1:
        return True
    return float(sys.mus.min()) / float(sys.lams.max()) > sys.m - 1


def grid_system(rows: int, cols: int, p: float, mu: float) -> ReliabilitySystem:
    """rows x cols grid, every node a terminal, every component identical.

    Component numbering goes band by band: the horizontal edges of row r left
    to right, then the vertical edges from row r down to row r+1 left to
    right. A 3x3 grid therefore has components 1-2 on the top row, 3-5
    vertical, 6-7 across the middle, 8-10 vertical, 11-12 on the bottom row.
    """
    if rows < 2 or cols < 2:
        raise InputError("grid needs rows >= 2 and cols >= 2")
    if not 0.0 < p < 1.0:
        raise InputError("unavailability p must lie in (0, 1)")
    if mu <= 0.0:
        raise InputError("nonpositive rate: mu")
    lam = p * mu / (1.0 - p)
    node = lambda r, c: r * cols + c + 1
    comps = []
    for r in range(rows):
        for c in range(cols - 1):
            comps.append(Component(len(comps) + 1, node(r, c), node(r, c + 1), lam, mu))
        if r < rows - 1:
            for c in range(cols):
                comps.append(Component(len(comps) + 1, node(r, c), node(r + 1, c), lam, mu))
    nodes = [node(r, c) for r in range(rows) for c in range(cols)]
    return ReliabilitySystem(nodes, nodes, comps, name=f"grid-{rows}x{cols}")


def to_document(sys: ReliabilitySystem) -> dict:
    """Serializable description that load_system round-trips."""
    doc = {
        "version": DOCUMENT_VERSION,
        "nodes": list(sys.nodes),
        "terminals": list(sys.terminals),
        "edges": [
            {"u": c.u, "v": c.v, "lambda": c.lam, "mu": c.mu}
            for c in sys.components
        ],
    }
    if sys.name:
        doc["name"] = sys.name
    return doc


def load_system(document) -> ReliabilitySystem:
    """Parse, validate, and normalize a network document.

    Accepts a dict, a JSON string starting with '{', or a filesystem path.
    Each edge carries mu plus either lambda or p; when p is given,
    lambda = p * mu / (1 - p). Emits a warning when mu_min / lam_max <= m - 1
    since the frequency estimators will refuse such systems.
    """
    if isinstance(document, (str, Path)):
        text = None
        if isinstance(document, str) and document.lstrip().startswith("{"):
            text = document
        else:
            try:
                text = Path(document).read_text(encoding="utf-8")
            except OSError as e:
                raise InputError(f"parse failure: cannot read {document}: {e}") from e
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"parse failure: {e}") from e
    if not isinstance(document, dict):
        raise InputError("parse failure: document is not an object")
    version = document.get("version")
    if version != DOCUMENT_VERSION:
        raise InputError(f"unsupported document version: {version!r}")
    try:
        nodes = list(document["nodes"])
        terminals = list(document["terminals"])
        edges = list(document["edges"])
    except KeyError as e:
        raise InputError(f"parse failure: missing field {e.args[0]!r}") from e
    comps = []
    for i, e in enumerate(edges, start=1):
        if not isinstance(e, dict) or "u" not in e or "v" not in e:
            raise InputError(f"parse failure: edge {i} lacks endpoints")
        if "mu" not in e:
            raise InputError(f"parse failure: edge {i} lacks mu")
        mu = float(e["mu"])
        if "lambda" in e and "p" in e:
            raise InputError(f"edge {i} gives both lambda and p")
        if "lambda" in e:
            lam = float(e["lambda"])
        elif "p" in e:
            p = float(e["p"])
            if not 0.0 < p < 1.0:
                raise InputError(f"edge {i}: p out of range (0, 1)")
            if mu <= 0.0:
                raise InputError(f"nonpositive rate on component {i}")
            lam = p * mu / (1.0 - p)
        else:
            raise InputError(f"parse failure: edge {i} lacks lambda or p")
        comps.append(Component(i, e["u"], e["v"], lam, mu))
    raw = ReliabilitySystem(nodes, terminals, comps, name=document.get("name"))
    merged = merge_parallel(raw)
    if not rate_margin_ok(merged):
        warnings.warn(
            "mu_min / lam_max <= m - 1: frequency approximation plans will be "
            "invalid for this system (exact oracles still work)",
            stacklevel=2,
        )
    return merged
