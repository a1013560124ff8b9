import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bsc_model, random_channels, random_model
from keyregion.discrete import ChannelEvaluator, DiscreteCompoundModel, inner_point, inner_triple, outer_point
from keyregion.info import CondDist, entropy
from keyregion.search import (
    ParetoSet,
    corollary1_gap,
    default_directions,
    outer_intersection,
    search_inner_region,
)


def max_rs(points):
    return max(p.triple.r_s for p in points)


def grid_max_rs(m, step=0.02):
    """Largest inner key rate over binary U with V constant, on a grid of rows."""
    ev = ChannelEvaluator(m)
    r = np.ones((2, 1))
    grid = np.linspace(0.0, 1.0, round(1 / step) + 1)
    best = 0.0
    for a, b in itertools.product(grid, grid):
        q = np.array([[a, 1 - a], [b, 1 - b]])
        best = max(best, inner_triple(ev.inner_terms(q, r)).r_s)
    return best


def test_directions():
    d = default_directions()
    assert d.shape == (10, 3)
    np.testing.assert_allclose(d.sum(axis=1), 1.0)
    assert np.all(d[:, 0] >= 0.25)
    assert [1.0, 0.0, 0.0] in d.tolist()


def test_budget_one_gives_origin():
    for kind in ("gs", "cs"):
        pts = search_inner_region(bsc_model(), kind, budget=1, caps=(3, 2), seed=5)
        assert [p.triple.as_tuple() for p in pts] == [(0.0, 0.0, 0.0)]


def test_noiseless_reaches_entropy():
    px = [0.2, 0.3, 0.5]
    m = DiscreteCompoundModel(px, CondDist.identity(3), [CondDist.identity(3)], [CondDist.constant(3, 2)])
    pts = search_inner_region(m, budget=4000, caps=(4, 1), seed=0)
    assert max_rs(pts) >= entropy(px) - 0.01


def test_compound_key_rate_below_single_state_grid():
    eve = [CondDist.bsc(0.4)]
    states = [CondDist.bsc(0.1), CondDist.bsc(0.2)]
    single = [grid_max_rs(DiscreteCompoundModel([0.5, 0.5], CondDist.identity(2), [s], eve)) for s in states]
    m = DiscreteCompoundModel([0.5, 0.5], CondDist.identity(2), states, eve)
    found = max_rs(search_inner_region(m, budget=3000, caps=(2, 1), seed=1))
    assert found <= min(single) + 1e-9


def test_search_is_deterministic():
    m = random_model(np.random.default_rng(7), K=2, L=1)
    a = search_inner_region(m, budget=800, caps=(3, 2), seed=11)
    b = search_inner_region(m, budget=800, caps=(3, 2), seed=11)
    assert [p.triple.as_tuple() for p in a] == [p.triple.as_tuple() for p in b]


def test_front_is_nondominated():
    m = random_model(np.random.default_rng(8), K=2, L=2)
    pts = search_inner_region(m, budget=800, caps=(3, 2), seed=2)
    vals = np.array([[p.triple.r_s, -p.triple.r_j, -p.triple.r_l] for p in pts])
    for i, j in itertools.permutations(range(len(vals)), 2):
        assert not (np.all(vals[i] >= vals[j] + 1e-9) and np.any(vals[i] > vals[j] + 1e-9))


def test_pareto_merge_is_order_independent():
    m = random_model(np.random.default_rng(9))
    pts = search_inner_region(m, budget=600, caps=(3, 2), seed=3) + search_inner_region(m, budget=600, caps=(2, 2), seed=4)
    fwd, rev = ParetoSet(), ParetoSet()
    for p in pts:
        fwd.add(p)
    for p in reversed(pts):
        rev.add(p)
    d = default_directions()
    np.testing.assert_allclose(fwd.support(d), rev.support(d), atol=1e-9)


def test_inner_front_inside_outer_table():
    m = random_model(np.random.default_rng(10), K=2, L=2)
    front = search_inner_region(m, budget=1500, caps=(3, 2), seed=0)
    table = outer_intersection(m, budget=1500, caps=(3, 2), seed=1)
    assert table.per_pair.shape == (2, 2, 10)
    for p in front:
        assert table.contains(p.triple, tol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_outer_point_dominates_inner_point_on_same_channels(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, K=2, L=2)
    t = random_channels(rng, nu=3, nv=2)
    d = default_directions()
    t_in = inner_point(m, t).triple
    inner = d @ np.array([t_in.r_s, -t_in.r_j, -t_in.r_l])
    for k, l in itertools.product(range(2), range(2)):
        t_out = outer_point(m, k, l, t).triple
        assert np.all(d @ np.array([t_out.r_s, -t_out.r_j, -t_out.r_l]) >= inner - 1e-12)


def test_duplicate_eve_states():
    base = random_model(np.random.default_rng(12))
    dup = DiscreteCompoundModel(base.p_x, base.enrollment, base.decoder_states, base.eve_states * 2)
    a = outer_intersection(base, budget=400, caps=(2, 2), seed=0)
    b = outer_intersection(dup, budget=400, caps=(2, 2), seed=0)
    np.testing.assert_array_equal(b.per_pair[0, 0], a.per_pair[0, 0])
    assert np.all(b.support <= a.support + 1e-9)


def test_gap_needs_single_state():
    with pytest.raises(ValueError):
        corollary1_gap(random_model(np.random.default_rng(0), K=2), budget=10)


def test_degenerate_gap_is_zero():
    m = DiscreteCompoundModel([1.0], [[1.0]], [[[1.0]]], [[[1.0]]])
    report = corollary1_gap(m, budget=50, caps=(2, 2))
    assert report.gap == 0.0


def test_constant_v_keeps_key_support():
    m = bsc_model(0.1, 0.3)
    full = max_rs(search_inner_region(m, budget=3000, caps=(4, 3), seed=0))
    flat = max_rs(search_inner_region(m, budget=3000, caps=(4, 1), seed=0))
    assert full == pytest.approx(flat, abs=1e-3)


@pytest.mark.slow
def test_bsc_gap_small():
    report = corollary1_gap(bsc_model(0.1, 0.3), budget=50_000, caps=(4, 3))
    assert report.gap <= 0.02
