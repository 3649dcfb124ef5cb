import json
import math

import numpy as np
import pytest

from relfreq import (
    Component,
    InputError,
    ReliabilitySystem,
    grid_system,
    load_system,
    merge_parallel,
    system_stats,
    to_document,
)
from relfreq.system import rate_margin_ok

from conftest import build_system, edge_system


def test_component_probability_and_weight():
    c = Component(1, 1, 2, lam=1.0, mu=9.0)
    assert c.p == pytest.approx(0.1)
    assert c.w == pytest.approx(-math.log(0.1))


def test_grid_shape(grid33):
    assert grid33.n == 9
    assert grid33.m == 12
    assert grid33.all_terminal
    assert grid33.k == 9


def test_grid_component_numbering(grid33):
    # horizontal edges of a band come before its diagonal-down verticals;
    # component ids are fixed because downstream cutset ids depend on them
    ends = {c.id: (c.u, c.v) for c in grid33.components}
    assert ends[1] == (1, 2)
    assert ends[2] == (2, 3)
    assert ends[3] == (1, 4)
    assert ends[4] == (2, 5)
    assert ends[5] == (3, 6)
    assert ends[6] == (4, 5)
    assert ends[7] == (5, 6)
    assert ends[8] == (4, 7)
    assert ends[9] == (5, 8)
    assert ends[10] == (6, 9)
    assert ends[11] == (7, 8)
    assert ends[12] == (8, 9)


def test_grid_rates(grid33):
    p = 1e-3
    assert np.allclose(grid33.ps, p)
    assert np.allclose(grid33.mus, 1.0)
    assert np.allclose(grid33.lams, p / (1.0 - p))


@pytest.mark.parametrize("rows,cols", [(1, 3), (3, 1), (0, 2)])
def test_grid_rejects_degenerate_shapes(rows, cols):
    with pytest.raises(InputError):
        grid_system(rows, cols, 1e-3, 1.0)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_grid_rejects_bad_probability(p):
    with pytest.raises(InputError):
        grid_system(2, 2, p, 1.0)


def test_validation_errors():
    c12 = Component(1, 1, 2, 0.1, 1.0)
    with pytest.raises(InputError, match="duplicate node"):
        ReliabilitySystem([1, 1, 2], [1, 2], [c12])
    with pytest.raises(InputError, match="terminals"):
        ReliabilitySystem([1, 2], [1, 3], [c12])
    with pytest.raises(InputError, match="terminal set too small"):
        ReliabilitySystem([1, 2], [1], [c12])
    with pytest.raises(InputError, match="no components"):
        ReliabilitySystem([1, 2], [1, 2], [])
    with pytest.raises(InputError, match="self-loop"):
        ReliabilitySystem([1, 2], [1, 2], [Component(1, 1, 1, 0.1, 1.0)])
    with pytest.raises(InputError, match="nonpositive rate"):
        ReliabilitySystem([1, 2], [1, 2], [Component(1, 1, 2, 0.0, 1.0)])
    with pytest.raises(InputError, match="disconnected"):
        ReliabilitySystem(
            [1, 2, 3], [1, 3], [Component(1, 1, 2, 0.1, 1.0)]
        )


def test_component_ids_renumbered():
    comps = [Component(7, 1, 2, 0.1, 1.0), Component(9, 2, 3, 0.1, 1.0)]
    sys_ = ReliabilitySystem([1, 2, 3], [1, 3], comps)
    assert [c.id for c in sys_.components] == [1, 2]


def test_connected_without_mask(grid33):
    assert grid33.connected_without(0)
    # {1,3} isolates node 1
    mask = (1 << 0) | (1 << 2)
    assert not grid33.connected_without(mask)
    # single component down never splits the grid
    for i in range(12):
        assert grid33.connected_without(1 << i)


def test_merge_parallel_two_edges():
    sys_ = build_system([(1, 2, 1.0, 9.0), (1, 2, 1.0, 9.0)])
    merged = merge_parallel(sys_)
    assert merged.m == 1
    c = merged.components[0]
    assert c.p == pytest.approx(0.01)
    assert c.mu == pytest.approx(18.0)
    # steady-state unavailability p = lam / (lam + mu) must be preserved
    assert c.lam / (c.lam + c.mu) == pytest.approx(0.01)


def test_merge_parallel_idempotent_and_ordering():
    sys_ = build_system(
        [(1, 2, 0.1, 1.0), (2, 3, 0.2, 2.0), (1, 2, 0.1, 1.0)], terminals=[1, 3]
    )
    merged = merge_parallel(sys_)
    assert merged.m == 2
    # first occurrence keeps its slot
    assert (merged.components[0].u, merged.components[0].v) == (1, 2)
    again = merge_parallel(merged)
    assert [c.endpoint_key() for c in again.components] == [
        c.endpoint_key() for c in merged.components
    ]
    assert np.allclose(again.ps, merged.ps)


def test_system_stats_flux_floor():
    sys_ = build_system([(1, 2, 0.5, 8.0), (2, 3, 1.0, 4.0)], terminals=[1, 3])
    st = system_stats(sys_, 1)
    # rho = mu_min * s - lam_max * (m - s)
    assert st.rho == pytest.approx(4.0 - 1.0)
    assert st.mu_total == pytest.approx(12.0)
    assert st.lam_total == pytest.approx(1.5)
    assert st.mu_min == pytest.approx(4.0)
    assert st.lam_max == pytest.approx(1.0)
    frac = system_stats(sys_, 1.5)
    assert frac.rho == pytest.approx(4.0 * 1.5 - 1.0 * 0.5)


def test_rate_margin():
    assert rate_margin_ok(edge_system(0.5, 1.0))
    ok = build_system([(1, 2, 0.01, 1.0), (2, 3, 0.01, 1.0)], terminals=[1, 3])
    assert rate_margin_ok(ok)
    bad = build_system([(1, 2, 1.0, 1.0), (2, 3, 1.0, 1.0)], terminals=[1, 3])
    assert not rate_margin_ok(bad)


def test_document_round_trip(grid33):
    doc = to_document(grid33)
    back = load_system(doc)
    assert back == grid33
    twice = load_system(to_document(back))
    assert twice == back


def test_load_from_string_and_path(tmp_path, grid33):
    text = json.dumps(to_document(grid33))
    assert load_system(text) == grid33
    path = tmp_path / "g.json"
    path.write_text(text)
    assert load_system(str(path)) == grid33


def test_load_accepts_p_instead_of_rates():
    doc = {
        "version": 1,
        "nodes": [1, 2],
        "terminals": [1, 2],
        "edges": [{"u": 1, "v": 2, "p": 0.1, "mu": 9.0}],
    }
    sys_ = load_system(doc)
    assert sys_.components[0].p == pytest.approx(0.1)
    assert sys_.components[0].lam == pytest.approx(1.0)


def test_load_merges_parallel_edges():
    doc = {
        "version": 1,
        "nodes": [1, 2],
        "terminals": [1, 2],
        "edges": [
            {"u": 1, "v": 2, "p": 0.1, "mu": 9.0},
            {"u": 1, "v": 2, "p": 0.1, "mu": 9.0},
        ],
    }
    assert load_system(doc).m == 1


def test_load_diagnostics():
    base = {"version": 1, "nodes": [1, 2], "terminals": [1, 2]}
    with pytest.raises(InputError, match="version"):
        load_system({**base, "version": 99, "edges": []})
    with pytest.raises(InputError, match="parse failure"):
        load_system("{not json")
    with pytest.raises(InputError, match="both lambda and p"):
        load_system(
            {**base, "edges": [{"u": 1, "v": 2, "p": 0.1, "lambda": 1.0, "mu": 9.0}]}
        )
    with pytest.raises(InputError, match="p out of range"):
        load_system({**base, "edges": [{"u": 1, "v": 2, "p": 1.2, "mu": 9.0}]})
    with pytest.raises(InputError, match="nonpositive rate"):
        load_system({**base, "edges": [{"u": 1, "v": 2, "lambda": -1.0, "mu": 9.0}]})


def test_load_warns_on_thin_repair_margin():
    doc = to_document(build_system([(1, 2, 1.0, 1.0), (2, 3, 1.0, 1.0)], terminals=[1, 3]))
    with pytest.warns(UserWarning, match="mu_min"):
        load_system(doc)
