import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import seeds
from keyregion import gaussian as g
from keyregion.info import gaussian_scalar_mi
from keyregion.selfcheck import FIG3_CASES, random_degraded_model, random_pd

CASE1, CASE2, CASE3 = (FIG3_CASES[c] for c in ("case1", "case2", "case3"))

# Closed forms worked out by hand from the SNRs s_y = 5 * nu_y, s_z = 5 * nu_z.
CASE1_HALF = (0.033809, 0.120252, 0.154061)  # r_s, GS r_j, CS r_j at alpha = 0.5
CASE1_ASYMPTOTE = 0.5 * np.log2(5.5125 / 4.2)
CASE2_ASYMPTOTE = 0.5 * np.log2((5 * 2.7075 + 1) / 4.2)


def test_power_gain():
    assert g.power_gain([0.95]) == pytest.approx(0.9025)
    assert g.power_gain([0.95] * 3) == pytest.approx(2.7075)
    assert g.power_gain(np.zeros(5)) == 0.0
    with pytest.raises(ValueError):
        g.power_gain([])


def test_saddle_indices():
    assert g.saddle_indices(CASE1) == (0, 0)
    m = g.CompoundGaussianModel(5.0, [[0.95, 0.95, 0.95], [0.95, 0.0, 0.0]], [[0.8, 0, 0, 0], [0.8, 0.8, 0.5, 0.5]])
    assert g.saddle_indices(m) == (1, 1)
    tie = g.CompoundGaussianModel(5.0, [[1.0], [-1.0]], [[0.5], [0.5]])
    assert g.saddle_indices(tie) == (0, 0)


def test_degradedness():
    assert g.degradedness_check(CASE3)
    assert not g.degradedness_check(g.CompoundGaussianModel(5.0, [[0.5]], [[0.8]]))
    assert g.degradedness_check(g.CompoundGaussianModel(5.0, [[0.8]], [[0.8]]))


def test_model_validation():
    with pytest.raises(g.ModelError):
        g.CompoundGaussianModel(0.0, [[1.0]], [[0.5]])
    with pytest.raises(g.ModelError):
        g.CompoundGaussianModel(1.0, [[1.0], [1.0, 2.0]], [[0.5]])
    with pytest.raises(g.ModelError):
        g.CompoundGaussianModel.from_dict({"sigma_x2": 1.0, "decoder_gains": [[1.0]]})
    assert g.CompoundGaussianModel.from_dict(CASE3.to_dict()).to_dict() == CASE3.to_dict()


@pytest.mark.parametrize("kind", g.KINDS)
def test_alpha_one_gives_zero(kind):
    for m in FIG3_CASES.values():
        assert g.rate_point(m, 1.0, kind).as_tuple() == (0.0, 0.0, 0.0)


def test_case1_half():
    gs, cs = g.gs_rate_point(CASE1, 0.5), g.cs_rate_point(CASE1, 0.5)
    r_s, r_j, r_j_cs = CASE1_HALF
    assert gs.r_s == pytest.approx(r_s, abs=1e-6)
    assert gs.r_j == pytest.approx(r_j, abs=1e-6)
    assert gs.r_l == gs.r_j
    assert cs.r_j == pytest.approx(r_j_cs, abs=1e-6)
    assert cs.r_l == pytest.approx(r_j, abs=1e-6)


def test_asymptotes():
    assert g.asymptotic_key_rate(CASE3) == pytest.approx(0.2771, abs=5e-4)
    assert g.asymptotic_key_rate(CASE2) == pytest.approx(CASE2_ASYMPTOTE, abs=1e-12)
    assert CASE2_ASYMPTOTE == pytest.approx(0.8957, abs=1e-4)
    assert g.asymptotic_key_rate(CASE1) == pytest.approx(CASE1_ASYMPTOTE, abs=1e-12)
    assert g.asymptotic_key_rate(g.CompoundGaussianModel(5.0, [[0.8]], [[0.8]])) == 0.0
    assert g.gs_rate_point(CASE3, 1e-9).r_s == pytest.approx(0.2771, abs=5e-4)


def test_non_degraded_refused():
    m = g.CompoundGaussianModel(5.0, [[0.5]], [[0.8]])
    with pytest.raises(g.NonDegradedError):
        g.gs_rate_point(m, 0.5)
    with pytest.raises(g.NonDegradedError):
        g.asymptotic_key_rate(m)
    assert g.membership(m, g.RateTriple(0.0, 1.0, 1.0))
    assert not g.membership(m, g.RateTriple(0.01, 1.0, 1.0))


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_alpha_range(alpha):
    with pytest.raises(ValueError):
        g.gs_rate_point(CASE1, alpha)


def test_alpha_from_storage_examples():
    assert g.alpha_from_storage(CASE1, 0.0) == 1.0
    assert g.alpha_from_storage(CASE1, CASE1_HALF[1]) == pytest.approx(0.5, abs=1e-5)
    big = 20.0
    assert g.alpha_from_storage(CASE1, big) == pytest.approx(1 / (2 ** (2 * big) * (1 + 5 * 0.9025)), rel=1e-6)
    with pytest.raises(ValueError):
        g.alpha_from_storage(CASE1, -1.0)


def test_key_rate_vs_storage_examples():
    assert g.key_rate_vs_storage(CASE1, 0.0) == 0.0
    assert g.key_rate_vs_storage(CASE3, 50.0) == pytest.approx(0.2771, abs=5e-4)
    assert g.key_rate_vs_storage(CASE1, 50.0) == pytest.approx(0.1962, abs=1e-4)
    assert g.key_rate_vs_storage(CASE1, 50.0) == pytest.approx(g.asymptotic_key_rate(CASE1), abs=1e-6)


def test_membership_examples():
    for kind in g.KINDS:
        assert g.membership(CASE2, g.RateTriple(0.0, 0.0, 0.0), kind)
        assert not g.membership(CASE2, g.RateTriple(g.asymptotic_key_rate(CASE2) + 0.01, 100, 100), kind)
        assert g.membership(CASE2, g.rate_point(CASE2, 0.5, kind), kind)
    # just below the storage needed at alpha = 0.5 but with the same key rate
    p = g.gs_rate_point(CASE2, 0.5)
    assert not g.membership(CASE2, g.RateTriple(p.r_s, p.r_j - 1e-3, p.r_l))


def test_trace_curve():
    c = g.trace_curve(CASE3, "gs", 200)
    arr = c.as_array()
    assert arr.shape == (200, 4)
    assert arr[0, 0] == pytest.approx(1e-6)
    assert arr[-1, 0] == 1.0
    np.testing.assert_array_equal(arr[-1, 1:], 0.0)
    assert np.all(np.diff(arr[:, 0]) > 0)
    assert np.all(np.diff(arr[:, 1]) <= 0)
    assert arr[:, 1].max() == pytest.approx(0.2771, abs=5e-4)
    # key rate strictly increasing in storage along the curve
    order = np.argsort(arr[:, 2])
    assert np.all(np.diff(arr[order, 1]) > 0)
    with pytest.raises(ValueError):
        g.trace_curve(CASE3, "gs", 1)
    assert c.to_csv().splitlines()[0] == "alpha,r_s,r_j,r_l"


@given(seeds(), st.floats(1e-6, 1.0))
def test_gs_cs_link(seed, alpha):
    m = random_degraded_model(np.random.default_rng(seed))
    gs, cs = g.gs_rate_point(m, alpha), g.cs_rate_point(m, alpha)
    assert cs.r_j - gs.r_j == pytest.approx(gs.r_s, abs=1e-10)
    assert cs.r_l == gs.r_l
    assert cs.r_s == gs.r_s


@given(seeds(), st.floats(1e-6, 1.0), st.sampled_from(g.KINDS))
def test_storage_round_trip(seed, alpha, kind):
    m = random_degraded_model(np.random.default_rng(seed))
    r_j = g.rate_point(m, alpha, kind).r_j
    assert g.alpha_from_storage(m, r_j, kind) == pytest.approx(alpha, abs=1e-9)


@given(seeds(), st.floats(0.0, 60.0))
def test_key_rate_vs_storage_consistent(seed, r_j):
    m = random_degraded_model(np.random.default_rng(seed))
    via_alpha = g.gs_rate_point(m, g.alpha_from_storage(m, r_j)).r_s
    assert g.key_rate_vs_storage(m, r_j) == pytest.approx(via_alpha, abs=1e-9)
    assert g.key_rate_vs_storage(m, r_j) <= g.asymptotic_key_rate(m) + 1e-12


@given(seeds())
def test_saddle_state_is_worst_pair(seed):
    m = random_degraded_model(np.random.default_rng(seed))
    alpha = 0.3
    s = m.sigma_x2
    best = g.gs_rate_point(m, alpha).r_s
    for hy in m.decoder_gains:
        for hz in m.eve_gains:
            sy, sz = s * g.power_gain(hy), s * g.power_gain(hz)
            r = 0.5 * np.log2((sy + 1) * (alpha * sz + 1) / ((alpha * sy + 1) * (sz + 1)))
            assert best <= r + 1e-12


@given(st.floats(1e-3, 1.0), st.floats(0.1, 10.0))
def test_gain_monotonicity(alpha, sigma):
    nus = np.linspace(0, 5, 50)
    f = np.log2((sigma * nus + 1) / (alpha * sigma * nus + 1))
    assert np.all(np.diff(f) >= -1e-15)


@given(seeds())
def test_rates_nonincreasing_in_alpha(seed):
    m = random_degraded_model(np.random.default_rng(seed))
    for kind in g.KINDS:
        arr = g.trace_curve(m, kind, 60).as_array()
        assert np.all(np.diff(arr[:, 1:], axis=0) <= 0)


def test_wa_identity_examples():
    assert g.wa_identity_check(0.0, [1.0, 2.0, 3.0]) == (1.0, 1.0)
    lhs, rhs = g.wa_identity_check(3.0, [1.0])
    assert lhs == pytest.approx(4.0) and rhs == 4.0
    h = np.random.default_rng(6).normal(size=6)
    lhs, rhs = g.wa_identity_check(2.5, h)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_scalarize():
    assert g.scalarize(CASE1) == ([pytest.approx(0.9025)], [pytest.approx(0.64)])
    zero = g.CompoundGaussianModel(5.0, [[0.0, 0.0]], [[0.0]])
    assert g.vector_gaussian_mi(5.0, zero.decoder_gains[0]) == 0.0
    h = np.random.default_rng(8).normal(size=8)
    assert g.vector_gaussian_mi(5.0, h) == pytest.approx(gaussian_scalar_mi(5.0, g.power_gain(h)), abs=1e-12)


def test_normalize_round_trip():
    for m in FIG3_CASES.values():
        back = g.normalize_covariance(g.FullCovariance(g.induced_covariance(m)), [m.omega_y], [m.omega_z])
        np.testing.assert_allclose(g.scalarize(back), g.scalarize(m), atol=1e-10)


def test_normalize_independent_block():
    sigma = np.diag([2.0, 1.0, 3.0])
    m = g.normalize_covariance(g.FullCovariance(sigma), [1], [1])
    assert g.power_gain(m.decoder_gains[0]) == 0.0
    assert g.power_gain(m.eve_gains[0]) == 0.0


def test_normalize_correlated_noise():
    # X with a 2-antenna observation whose noise is correlated
    h = np.array([0.9, 0.4])
    noise = np.array([[1.0, 0.6], [0.6, 2.0]])
    sx2 = 3.0
    sigma = np.zeros((4, 4))
    sigma[0, 0] = sx2
    sigma[0, 1:3] = sigma[1:3, 0] = sx2 * h
    sigma[1:3, 1:3] = sx2 * np.outer(h, h) + noise
    sigma[3, 3] = 1.0
    m = g.normalize_covariance(g.FullCovariance(sigma), [2], [1])
    assert g.vector_gaussian_mi(sx2, m.decoder_gains[0]) == pytest.approx(g.gaussian_block_mi(sigma, slice(1, 3)), abs=1e-10)


def test_full_covariance_validation():
    with pytest.raises(g.ModelError):
        g.FullCovariance(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(g.ModelError):
        g.FullCovariance(np.array([[1.0, 0.1], [0.2, 1.0]]))
    with pytest.raises(g.ModelError):
        g.normalize_covariance(g.FullCovariance(np.eye(3)), [1], [2])


@given(seeds())
def test_normalize_preserves_information(seed):
    rng = np.random.default_rng(seed)
    sigma = random_pd(rng, 1 + 2 * 2 + 3)
    m = g.normalize_covariance(g.FullCovariance(sigma), [2, 2], [3])
    blocks = [slice(1, 3), slice(3, 5), slice(5, 8)]
    for b, h in zip(blocks, list(m.decoder_gains) + list(m.eve_gains)):
        assert g.vector_gaussian_mi(m.sigma_x2, h) == pytest.approx(g.gaussian_block_mi(sigma, b), abs=1e-10)


def test_single_antenna_examples():
    gs, cs = g.single_antenna_region(5.0, 0.95, 0.8, 1.0)
    assert gs.as_tuple() == (0.0, 0.0, 0.0) and cs.as_tuple() == (0.0, 0.0, 0.0)
    gs, cs = g.single_antenna_region(5.0, 0.95, 0.8, 0.5)
    assert gs.as_tuple() == pytest.approx(g.gs_rate_point(CASE1, 0.5).as_tuple(), abs=1e-12)
    assert cs.as_tuple() == pytest.approx(g.cs_rate_point(CASE1, 0.5).as_tuple(), abs=1e-12)
    # no eavesdropper information: key rate is I(X;Y) - I(X;Y|U) for the test channel
    gs, _ = g.single_antenna_region(5.0, 0.95, 0.0, 0.5)
    s = 5.0 * 0.9025
    assert gs.r_s == pytest.approx(0.5 * np.log2((s + 1) / (0.5 * s + 1)), abs=1e-12)
    with pytest.raises(g.NonDegradedError):
        g.single_antenna_region(5.0, 0.5, 0.8, 0.5)
