import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boltzlog.errors import DomainError
from boltzlog.weights import (
    G_tilde,
    G_weight,
    WeightParams,
    bracket_alpha,
    check_Gtilde_diff_bound,
    check_psi_properties,
    check_subadditivity,
    h_profile,
    log_G_weight,
    psi_alpha,
    subadditivity_factor,
)

E = math.e
# q h(1) + h(1) - h(2) at alpha = e, mu = 1 (q = 1), evaluated with mpmath
SUBADDITIVITY_UNIT_MARGIN = 1.0423318194187169


def test_bracket_alpha_examples():
    assert bracket_alpha(0.0, 1.0) == 1.0
    assert bracket_alpha(3.0, 1.0) == 2.0
    assert bracket_alpha(E * E - E, E) == pytest.approx(E, rel=1e-15)
    with pytest.raises(DomainError):
        bracket_alpha(1.0, -1.0)


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0, 3.5])
def test_h_at_zero_for_smallest_alpha(mu):
    assert h_profile(0.0, math.exp(mu), mu) == pytest.approx(mu ** (mu + 1), rel=1e-14)


def test_h_is_concave_on_random_pairs():
    rng = np.random.default_rng(1)
    mu = rng.uniform(0.2, 4.0, 10_000)
    alpha = np.exp(mu) * rng.uniform(1.0, 100.0, mu.size)
    s1, s2 = 10.0 ** rng.uniform(-3, 12, (2, mu.size))
    mid = h_profile(0.5 * (s1 + s2), alpha, mu)
    avg = 0.5 * (h_profile(s1, alpha, mu) + h_profile(s2, alpha, mu))
    assert np.all(mid >= avg * (1 - 1e-13))


def test_subadditivity_zero_minus():
    for alpha, mu in [(E, 1.0), (100.0, 2.0), (math.exp(0.3), 0.3)]:
        expected = subadditivity_factor(alpha, mu) * math.log(alpha) ** (mu + 1)
        assert check_subadditivity(alpha, mu, 0.0, 17.0) == pytest.approx(expected, rel=1e-13)


def test_subadditivity_unit_example():
    got = check_subadditivity(E, 1.0, 1.0, 1.0)
    direct = 1.0 * math.log(E + 1) ** 2 + math.log(E + 1) ** 2 - math.log(E + 2) ** 2
    assert got == pytest.approx(direct, rel=1e-14)
    assert got == pytest.approx(SUBADDITIVITY_UNIT_MARGIN, rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(
    mu=st.floats(0.05, 5.0),
    a_factor=st.floats(1.0, 1e6),
    lo=st.floats(0.0, 1e12),
    hi=st.floats(0.0, 1e12),
)
def test_subadditivity_property(mu, a_factor, lo, hi):
    alpha = min(math.exp(mu) * a_factor, 1e6) if math.exp(mu) <= 1e6 else math.exp(mu)
    sm, sp = min(lo, hi), max(lo, hi)
    assert check_subadditivity(alpha, mu, sm, sp) >= -1e-10 * max(1.0, h_profile(sm + sp, alpha, mu))


def test_subadditivity_rejects_small_alpha_and_bad_order():
    with pytest.raises(DomainError):
        check_subadditivity(2.0, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        check_subadditivity(E, 1.0, 2.0, 1.0)


def test_weight_params_validation():
    with pytest.raises(DomainError):
        WeightParams(alpha=2.0, beta=1.0, mu=1.0)
    with pytest.raises(DomainError):
        WeightParams(alpha=E, beta=0.0, mu=1.0)
    with pytest.raises(DomainError):
        WeightParams(alpha=E, beta=1.0, mu=1.0, t=-1.0)


def test_G_examples():
    x = np.linspace(0, 1e6, 11)
    np.testing.assert_array_equal(G_weight(x, WeightParams(E, 3.0, 1.0, t=0.0)), 1.0)
    # sqrt(alpha + x) = e  <=>  x = e^2 - alpha
    p = WeightParams(E, 1.0, 1.0, t=1.0)
    assert G_weight(E * E - E, p) == pytest.approx(E, rel=1e-14)
    assert G_weight(4.0, p.with_cut(1.0)) == 0.0
    assert G_weight(0.5, p.with_cut(1.0)) > 1.0


def test_G_at_least_one_and_log_is_finite_for_huge_weights():
    p = WeightParams(E**4, 50.0, 2.0, t=1.0)
    x = np.logspace(0, 12, 50)
    lg = log_G_weight(x, p)
    assert np.all(np.isfinite(lg)) and np.all(lg >= 0)


def test_G_tilde_matches_G():
    p = WeightParams(10.0, 0.7, 1.5, t=0.3)
    x = np.logspace(-2, 6, 30)
    np.testing.assert_allclose(G_tilde(x, p), G_weight(x, p), rtol=1e-13)


def test_Gtilde_bound_zero_minus_gives_rhs_zero_lhs():
    p = WeightParams(E, 1.0, 1.0, t=1.0)
    # s_- = 0: both sides vanish
    assert check_Gtilde_diff_bound(p, 0.0, 5.0) == 0.0


def test_Gtilde_bound_equal_split_factor_half():
    p = WeightParams(E, 1.0, 1.0, t=0.5)
    s = 3.0
    margin = check_Gtilde_diff_bound(p, s, s)
    mu, bt = p.mu, p.bt
    rhs = 2.0**-mu * bt * (mu + 1) * 0.5 * math.log(E + 2 * s) ** mu * G_tilde(s, p) ** subadditivity_factor(E, mu) * G_tilde(s, p)
    lhs = G_tilde(2 * s, p) - G_tilde(s, p)
    assert margin * G_tilde(s, p) == pytest.approx(rhs - lhs, rel=1e-10)
    assert margin >= 0


@settings(max_examples=300, deadline=None)
@given(
    mu=st.floats(0.1, 4.0),
    a_factor=st.floats(1.0, 1e4),
    bt=st.floats(1e-6, 20.0),
    lo=st.floats(0.0, 1e12),
    hi=st.floats(1e-9, 1e12),
)
def test_Gtilde_bound_property(mu, a_factor, bt, lo, hi):
    p = WeightParams(math.exp(mu) * a_factor, bt, mu, t=1.0)
    sm, sp = min(lo, hi), max(lo, hi)
    assert check_Gtilde_diff_bound(p, sm, sp) >= -1e-10


def test_psi_report_on_grid():
    rng = np.random.default_rng(7)
    lam = rng.uniform(0, 1, 10_000)
    x = 10.0 ** rng.uniform(0, 12, 10_000)
    rep = check_psi_properties(E, 1.0, 3.0, zip(lam, x))
    assert rep.passed
    assert rep.scaling_checked > 5000
    assert psi_alpha(rep.r0 * 2, E, 1.0) <= rep.r0 * 2


def test_psi_scaling_equality_at_lambda_one():
    x = np.logspace(2, 10, 20)
    rep = check_psi_properties(E, 1.0, 3.0, [(1.0, v) for v in x])
    assert rep.scaling_violations == 0
    assert rep.min_scaling_margin == pytest.approx(0.0, abs=1e-12)


def test_psi_lambda_zero_is_vacuous():
    rep = check_psi_properties(E, 1.0, 3.0, [(0.0, 1e8)])
    assert rep.scaling_checked == 0 and rep.passed


def test_psi_rejects_bad_inputs():
    with pytest.raises(DomainError):
        check_psi_properties(1.0, 1.0, 3.0, [])
    with pytest.raises(DomainError):
        check_psi_properties(E, 1.0, 0.5, [])
    with pytest.raises(DomainError):
        check_psi_properties(E, 1.0, 3.0, [(1.5, 10.0)])
