import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsisac import bounds, tradeoff
from rsisac.bounds import RatePoint, Scheme
from rsisac.linkbudget import derive


def _pts(xy):
    return [RatePoint(float(x), float(y), Scheme.RS, float(i)) for i, (x, y) in enumerate(xy)]


def _xy(frontier):
    return [(p.r_est_bps, p.r_c_bps) for p in frontier.hull_points]


def test_hull_drops_dominated_and_collinear():
    f = tradeoff.upper_convex_hull(_pts([(0, 4), (1, 3), (2, 2), (3, 0), (1, 1), (0.5, 0.5)]))
    assert _xy(f) == [(3, 0), (2, 2), (0, 4)]


def test_hull_ties_keep_best():
    f = tradeoff.upper_convex_hull(_pts([(1, 5), (1, 2), (3, 1), (3, 0.5)]))
    assert _xy(f) == [(3, 1), (1, 5)]


def test_hull_single_point_and_empty():
    f = tradeoff.upper_convex_hull(_pts([(2, 3)]))
    assert _xy(f) == [(2, 3)]
    assert f.area() == pytest.approx(6.0)
    with pytest.raises(ValueError):
        tradeoff.upper_convex_hull([])


def test_area_and_value_at():
    f = tradeoff.upper_convex_hull(_pts([(0, 4), (2, 2), (3, 0)]))
    # rectangle-free region: trapezoids 0..2 and 2..3
    assert f.area() == pytest.approx(0.5 * (4 + 2) * 2 + 0.5 * 2 * 1)
    assert f.value_at(1.0) == pytest.approx(3.0)
    assert f.value_at(0.0) == pytest.approx(4.0)
    assert f.value_at(3.5) == -np.inf


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=1, max_size=30), st.randoms())
def test_hull_permutation_invariant_and_dominant(xy, rnd):
    a = tradeoff.upper_convex_hull(_pts(xy))
    shuffled = list(xy)
    rnd.shuffle(shuffled)
    b = tradeoff.upper_convex_hull(_pts(shuffled))
    assert _xy(a) == _xy(b)
    verts = _xy(a)
    # vertices run right to left, rising
    assert all(x1 > x2 and y1 < y2 for (x1, y1), (x2, y2) in zip(verts, verts[1:]))
    for x, y in xy:
        assert a.value_at(x) >= y - 1e-9 * (1 + abs(y))


def test_noma_curve_vertical(params):
    c = tradeoff.sweep(params, "noma")
    assert np.all(c.r_est == c.r_est[0])
    assert np.all(np.diff(c.r_c) > 0)


def test_rs_starts_at_noma_top(params):
    rs = tradeoff.sweep(params, "rs")
    noma = tradeoff.sweep(params, "noma")
    assert rs.points[0].r_est_bps == noma.points[-1].r_est_bps
    assert rs.points[0].r_c_bps == noma.points[-1].r_c_bps
    assert rs.r_c.max() > noma.r_c.max()


def test_area_ordering(params):
    areas = {s: tradeoff.upper_convex_hull(tradeoff.sweep(params, s).points).area() for s in Scheme}
    assert areas[Scheme.RS] >= areas[Scheme.NOMA]
    assert areas[Scheme.RS] >= areas[Scheme.OMA]


def test_combined_frontier_dominates_each(params):
    curves = [tradeoff.sweep(params, s, 201) for s in Scheme]
    comb = tradeoff.combined_frontier(curves)
    for c in curves:
        assert comb.area() >= tradeoff.upper_convex_hull(c.points).area() * (1 - 1e-12)


def test_sweep_grid_handling(params):
    c = tradeoff.sweep_rs(params, [0.5, 0.0, 1.0])
    assert list(c.knob_grid) == [0.0, 0.5, 1.0]
    d = derive(params)
    assert c.points[1].r_c_bps == bounds.rs_bounds(d, 0.5, params.comm_power_w, params.radar_power_w).r_c_bps
    for bad in ([], [0.1, 0.1], [-0.1], [1.5], [np.nan]):
        with pytest.raises(ValueError):
            tradeoff.sweep_rs(params, bad)
    assert len(tradeoff.sweep(params, "oma", 11).points) == 11


def test_alpha_vs_range_monotone(params):
    rows = tradeoff.sweep_alpha_vs_range(params, np.linspace(1e3, 5e4, 50))
    clamped = np.array([r[2] for r in rows])
    assert np.all(np.diff(clamped) >= 0)
    assert clamped[0] < 1e-3 < clamped[-1]
    with pytest.raises(ValueError):
        tradeoff.sweep_alpha_vs_range(params, [0.0])


@pytest.mark.parametrize("range_m", [2e3, 8e3, 1.5e4, 3e4, 5e4])
def test_alpha_matches_grid_search(params, range_m):
    rows = tradeoff.sweep_alpha_vs_range(params, [range_m])
    step = 1e-5
    assert abs(rows[0][2] - tradeoff.grid_argmax_alpha(params, step, range_m)) <= step
