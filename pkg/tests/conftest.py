import numpy as np
import pytest

from relfreq import Component, ReliabilitySystem, grid_system


def build_system(edges, terminals=None, name=None):
    """edges: list of (u, v, lam, mu). Nodes inferred. terminals default to
    all nodes."""
    nodes = sorted({u for u, v, _, _ in edges} | {v for _, v, _, _ in edges})
    if terminals is None:
        terminals = nodes
    components = [
        Component(i, u, v, lam, mu) for i, (u, v, lam, mu) in enumerate(edges, start=1)
    ]
    return ReliabilitySystem(nodes=nodes, terminals=terminals, components=components, name=name)


def edge_system(p, mu):
    lam = p * mu / (1.0 - p)
    return build_system([(1, 2, lam, mu)], name="single-edge")


def series_system(p, mu, m=2):
    lam = p * mu / (1.0 - p)
    edges = [(i, i + 1, lam, mu) for i in range(1, m + 1)]
    return build_system(edges, name=f"series-{m}")


def random_connected_system(rng, max_nodes=7, max_edges=14, all_terminal=False):
    """Random connected system with positive flux floor: unavailabilities
    are kept small enough that mu_min exceeds lam_max * (m - 1)."""
    n = int(rng.integers(2, max_nodes + 1))
    edges = []
    for v in range(2, n + 1):
        u = int(rng.integers(1, v))
        edges.append((u, v))
    extra = int(rng.integers(0, max_edges - len(edges) + 1))
    for _ in range(extra):
        u = int(rng.integers(1, n + 1))
        v = int(rng.integers(1, n + 1))
        if u != v:
            edges.append((min(u, v), max(u, v)))
    built = []
    for u, v in edges:
        p = float(10.0 ** rng.uniform(-4.0, -2.0))
        mu = float(rng.uniform(0.5, 2.0))
        built.append((u, v, p * mu / (1.0 - p), mu))
    if all_terminal:
        terminals = None
    else:
        k = int(rng.integers(2, n + 1))
        terminals = sorted(rng.choice(np.arange(1, n + 1), size=k, replace=False).tolist())
    return build_system(built, terminals=terminals)


@pytest.fixture(scope="session")
def grid33():
    return grid_system(3, 3, 1e-3, 1.0)


@pytest.fixture(scope="session")
def four_cycle():
    return grid_system(2, 2, 1e-2, 1.0)


@pytest.fixture(scope="session")
def single_edge():
    return edge_system(0.1, 9.0)
