import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoi_cae import (
    AoiWeights,
    CaePenalty,
    SourceModel,
    StationaryDist,
    UnboundedAoI,
    aoi_stationary_distribution,
    average_aoi,
    cae_coefficients,
    exact_joint_stationary,
    expected_cae,
    closed_form_joint,
    lower_bound_value,
    stationary_distribution,
    table1,
)
from aoi_cae.analysis import CaeCoefficients, DegenerateChainError

from _instances import open_prob

TABLE1_PI = StationaryDist(0.75 / 1.1, 0.35 / 1.1)


def joint_by_iteration(p01, p10, psi, steps=20000):
    """Push a distribution on (X, X_hat) forward slot by slot until it settles."""
    move = {(0, 0): 1 - p01, (0, 1): p01, (1, 0): p10, (1, 1): 1 - p10}
    dist = {(x, xh): 0.25 for x in (0, 1) for xh in (0, 1)}
    for _ in range(steps):
        new = dict.fromkeys(dist, 0.0)
        for (x, xh), mass in dist.items():
            for x2 in (0, 1):
                m = mass * move[(x, x2)]
                new[(x2, x2)] += m * psi
                new[(x2, xh)] += m * (1 - psi)
        dist = new
    return dist


# ---- CAE coefficients ---------------------------------------------------


def test_cae_coefficients_table1():
    pen = table1().penalty
    # zeta = sum d_ij pi_i pi_j ; xi = pi0 pi1 (d00 - d01 - d10 + d11), evaluated by hand
    pi0, pi1 = TABLE1_PI.pi0, TABLE1_PI.pi1
    zeta = -0.25 * pi0**2 + pi0 * pi1 + pi1 * pi0 - 0.25 * pi1**2
    xi = pi0 * pi1 * (-0.25 - 1 - 1 - 0.25)
    c = cae_coefficients(pen, TABLE1_PI)
    assert c.zeta == pytest.approx(zeta, abs=1e-15)
    assert c.xi == pytest.approx(xi, abs=1e-15)
    assert round(c.zeta, 6) == 0.292355
    assert round(c.xi, 6) == -0.542355


def test_cae_coefficients_zero_penalty():
    c = cae_coefficients(CaePenalty(0, 0, 0, 0), TABLE1_PI)
    assert (c.zeta, c.xi) == (0.0, 0.0)


def test_cae_coefficients_symmetric():
    c = cae_coefficients(CaePenalty(0, 1, 1, 0), StationaryDist(0.5, 0.5))
    assert c.zeta == pytest.approx(0.5)
    assert c.xi == pytest.approx(-0.5)


def test_expected_cae_examples():
    c = CaeCoefficients(0.292355, -0.542355)
    assert expected_cae(c, 0.0) == 0.292355
    # the quoted 0.009699 is rounded; exact arithmetic gives 0.0096975
    assert expected_cae(c, 0.521167) == pytest.approx(0.009699, abs=1e-5)
    assert expected_cae(c, 1.0) == pytest.approx(-0.25, abs=1e-12)


def test_expected_cae_at_full_rate_is_diagonal_mean():
    # psi = 1: the estimate always matches, so CAE = pi0 d00 + pi1 d11
    pen = table1().penalty
    c = cae_coefficients(pen, TABLE1_PI)
    assert expected_cae(c, 1.0) == pytest.approx(TABLE1_PI.pi0 * pen.d00 + TABLE1_PI.pi1 * pen.d11, abs=1e-15)


def test_expected_cae_matches_joint_table():
    rng = np.random.default_rng(5)
    pen = CaePenalty(-0.3, 1.7, 0.4, -0.1)
    dist = StationaryDist(0.3, 0.7)
    c = cae_coefficients(pen, dist)
    for psi in rng.uniform(0, 1, 20):
        assert expected_cae(c, psi) == pytest.approx(closed_form_joint(dist, psi).expectation(pen), abs=1e-14)


@given(
    d=st.tuples(st.floats(-1, 0), st.floats(0, 2), st.floats(0, 2), st.floats(-1, 0)),
    pi0=st.floats(0, 1),
)
def test_xi_nonpositive_under_sign_convention(d, pi0):
    assert cae_coefficients(CaePenalty(*d), StationaryDist(pi0, 1 - pi0)).xi <= 0


# ---- AoI ----------------------------------------------------------------


def test_average_aoi_examples():
    assert average_aoi(1.0, AoiWeights(1, 1), 0.3) == 1.0
    assert average_aoi(0.521167, AoiWeights(1, 1), 0.318182) == pytest.approx(1.918773, abs=1e-5)
    assert average_aoi(0.521167, AoiWeights(1, 1), 0.318182) == pytest.approx(1 / 0.521167, abs=1e-15)
    assert average_aoi(0.5, AoiWeights(1, 3), 0.25) == pytest.approx(2.5)


def test_average_aoi_zero_rate():
    with pytest.raises(UnboundedAoI):
        average_aoi(0.0, AoiWeights(1, 1), 0.3)
    with pytest.raises(UnboundedAoI):
        lower_bound_value(0.0, AoiWeights(1, 1), 0.3)


def test_lower_bound_examples():
    assert lower_bound_value(0.521167, AoiWeights(1, 1), 0.318182) == pytest.approx(1.459387, abs=1e-5)
    assert lower_bound_value(1.0, AoiWeights(1, 1), 0.3) == 1.0
    assert lower_bound_value(0.5, AoiWeights(1, 3), 0.25) == pytest.approx(2.0)


@given(psi=st.floats(1e-6, 1.0), w0=st.integers(1, 10), extra=st.integers(0, 10), pi1=st.floats(0, 1))
def test_lower_bound_below_average(psi, w0, extra, pi1):
    w = AoiWeights(w0, w0 + extra)
    lb, avg = lower_bound_value(psi, w, pi1), average_aoi(psi, w, pi1)
    if psi == 1.0:
        assert lb == avg
    elif psi < 1 - 1e-9:
        assert lb < avg
    else:
        assert lb <= avg


def test_aoi_distribution_geometric():
    d = aoi_stationary_distribution(0.5, AoiWeights(1, 1), StationaryDist(0.7, 0.3), 10)
    assert d.ages.tolist() == list(range(1, 11))
    np.testing.assert_allclose(d.probs, 0.5 ** np.arange(1, 11), rtol=0, atol=1e-15)


def test_aoi_distribution_split_weights():
    d = aoi_stationary_distribution(0.5, AoiWeights(1, 2), StationaryDist(0.5, 0.5), 5)
    np.testing.assert_allclose(d.probs[:3], [0.25, 0.375, 0.1875], atol=1e-15)


def test_aoi_distribution_bad_kmax():
    with pytest.raises(ValueError):
        aoi_stationary_distribution(0.5, AoiWeights(1, 4), StationaryDist(0.5, 0.5), 3)


def aoi_pmf_by_enumeration(psi, w0, w1, pi1, k_max):
    """Age pmf from the reset rule: delivery at lag j >= 0 back resets to w_s, age = w_s + j."""
    pmf = np.zeros(k_max + 1)
    for w, weight in ((w0, 1 - pi1), (w1, pi1)):
        for j in range(k_max + 1 - w):
            pmf[w + j] += weight * psi * (1 - psi) ** j
    return pmf


@settings(max_examples=60)
@given(psi=st.floats(0.02, 1.0), w0=st.integers(1, 6), extra=st.integers(0, 6), pi1=st.floats(0, 1))
def test_aoi_distribution_properties(psi, w0, extra, pi1):
    w = AoiWeights(w0, w0 + extra)
    dist = StationaryDist(1 - pi1, pi1)
    k_max = w.w1 + 50
    d = aoi_stationary_distribution(psi, w, dist, k_max)
    assert d.total_mass() == pytest.approx(1.0, abs=1e-12)
    assert d.mean() == pytest.approx(average_aoi(psi, w, pi1), rel=1e-9, abs=1e-9)
    np.testing.assert_allclose(d.probs, aoi_pmf_by_enumeration(psi, w.w0, w.w1, pi1, k_max)[w.w0 :], atol=1e-14)


# ---- exact joint chain --------------------------------------------------


def test_exact_joint_fast_source():
    j = exact_joint_stationary(SourceModel(0.5, 0.5), 0.5)
    np.testing.assert_allclose(j.p, [[0.375, 0.125], [0.125, 0.375]], atol=1e-14)
    assert j.match_probability == pytest.approx(0.75, abs=1e-14)
    # closed form agrees: pi0^2 + pi1^2 + 2 pi0 pi1 psi
    assert closed_form_joint(StationaryDist(0.5, 0.5), 0.5).match_probability == pytest.approx(0.75)


def test_exact_joint_slow_source():
    psi, p = 0.5, 0.1
    # match probability m solves m = psi + (1 - psi)(p + m(1 - 2p))
    m = (psi + (1 - psi) * p) / (1 - (1 - psi) * (1 - 2 * p))
    j = exact_joint_stationary(SourceModel(p, p), psi)
    assert j.match_probability == pytest.approx(m, abs=1e-12)
    assert round(m, 6) == 0.916667
    assert closed_form_joint(StationaryDist(0.5, 0.5), psi).match_probability == pytest.approx(0.75)


def test_exact_joint_full_rate():
    j = exact_joint_stationary(SourceModel(0.2, 0.7), 1.0)
    assert j[0, 1] == 0.0 and j[1, 0] == 0.0


def test_exact_joint_degenerate():
    with pytest.raises(DegenerateChainError):
        exact_joint_stationary(SourceModel(0.3, 0.3), 0.0)
    with pytest.raises(DegenerateChainError):
        exact_joint_stationary(SourceModel(0.0, 0.0), 0.5)


@pytest.mark.parametrize("p01,p10,psi", [(0.35, 0.75, 0.521167), (0.05, 0.2, 0.3), (0.9, 0.8, 0.7), (1.0, 1.0, 0.4)])
def test_exact_joint_matches_iteration(p01, p10, psi):
    it = joint_by_iteration(p01, p10, psi)
    j = exact_joint_stationary(SourceModel(p01, p10), psi)
    for (x, xh), v in it.items():
        assert j[x, xh] == pytest.approx(v, abs=1e-12)


@given(p01=open_prob, p10=open_prob, psi=st.floats(0.01, 1.0))
def test_exact_joint_source_marginal(p01, p10, psi):
    src = SourceModel(p01, p10)
    j = exact_joint_stationary(src, psi)
    d = stationary_distribution(src)
    np.testing.assert_allclose(j.source_marginal(), [d.pi0, d.pi1], atol=1e-12)
    assert j.p.sum() == pytest.approx(1.0, abs=1e-12)
    assert (j.p >= 0).all()


@given(p01=open_prob, psi=st.floats(0.01, 1.0))
def test_closed_form_exact_for_memoryless_source(p01, psi):
    src = SourceModel(p01, 1.0 - p01)
    j = exact_joint_stationary(src, psi)
    np.testing.assert_allclose(j.p, closed_form_joint(stationary_distribution(src), psi).p, atol=1e-12)
