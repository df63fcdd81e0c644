import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boltzlog.collision import IsoSpectralField, quadratic_grid, radial_integral
from boltzlog.errors import DomainError, ResolutionError
from boltzlog.regularity import (
    b_predicted,
    check_amu_forward,
    check_laplace_integral,
    derivative_norms,
    fit_beta,
    fit_growth,
    gaussian_growth,
    laplace_stationary_point,
    log_derivative_norms_profile,
    maxwellian_norms_exact,
    weight_decay_profile,
)

ALPHA4 = math.e**4


@pytest.fixture(scope="module")
def wide_grid():
    return quadratic_grid(2048, 1e4)


@settings(max_examples=25, deadline=None)
@given(tau=st.floats(0.05, 3.0), mu=st.floats(0.5, 2.0), t=st.floats(0.1, 2.0))
def test_fit_beta_recovers_exact_model(wide_grid, tau, mu, t):
    phi = np.exp(-tau * (0.5 * np.log(ALPHA4 + wide_grid)) ** (mu + 1))
    fit = fit_beta(IsoSpectralField(wide_grid, phi), t, ALPHA4, mu, noise_floor=0.0)
    assert fit.beta_t == pytest.approx(tau, rel=1e-10)
    assert fit.beta_hat == pytest.approx(tau / t, rel=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.M_hat == pytest.approx(1.0, rel=1e-8)


def test_fit_beta_gained_mode_removes_initial_decay(wide_grid):
    w = (0.5 * np.log(ALPHA4 + wide_grid)) ** 2
    ref = (1 + wide_grid) ** -4.0
    phi = ref * np.exp(-0.3 * w)
    fit = fit_beta(IsoSpectralField(wide_grid, phi), 1.0, ALPHA4, 1.0, reference=ref)
    assert fit.beta_t == pytest.approx(0.3, rel=1e-10)


def test_fit_beta_maxwellian_is_a_model_mismatch(grid):
    fit = fit_beta(IsoSpectralField(grid, np.exp(-grid)), 1.0, math.e, 1.0, noise_floor=0.0)
    assert fit.r_squared < 0.99
    assert fit.M_hat > 1e20


def test_fit_beta_refuses_time_zero_and_empty_window(wide_grid):
    phi = IsoSpectralField(wide_grid, (1 + wide_grid) ** -4.0)
    with pytest.raises(DomainError):
        fit_beta(phi, 0.0, ALPHA4, 1.0)
    with pytest.raises(DomainError):
        fit_beta(phi, 1.0, ALPHA4, 1.0, x_window=(1.0, 1.001))


def test_fit_row_schema(wide_grid):
    fit = fit_beta(IsoSpectralField(wide_grid, (1 + wide_grid) ** -4.0), 0.5, ALPHA4, 1.0)
    assert set(fit.as_row()) == {"t", "beta_hat", "beta_t", "M_hat", "r_squared", "window_lo", "window_hi", "n_points"}


def test_derivative_norms_maxwellian_closed_form(grid):
    got = derivative_norms(IsoSpectralField(grid, np.exp(-grid)), 30)
    np.testing.assert_allclose(got, maxwellian_norms_exact(30), rtol=1e-10)


def test_derivative_norm_zero_is_plancherel_norm(grid):
    phi = IsoSpectralField(grid, (1 - 0.2 * grid) * np.exp(-0.8 * grid))
    assert derivative_norms(phi, 0)[0] == pytest.approx(math.sqrt(radial_integral(grid, phi.values**2, 3)), rel=1e-14)


def test_derivative_norms_report_required_grid():
    x = quadratic_grid(512, 20.0)
    with pytest.raises(ResolutionError) as err:
        derivative_norms(IsoSpectralField(x, np.exp(-x)), 30)
    assert err.value.required_x_max > 20.0
    with pytest.raises(DomainError):
        derivative_norms(IsoSpectralField(x, np.exp(-x)), 31)


def test_profile_quadrature_matches_grid_quadrature(grid):
    log_D = log_derivative_norms_profile(lambda s: -np.exp(s), 20)
    np.testing.assert_allclose(np.exp(log_D), maxwellian_norms_exact(20), rtol=1e-10)


def test_b_predicted_examples():
    assert b_predicted(1.0, 1.0) == pytest.approx(0.25, rel=1e-15)
    assert b_predicted(4.0, 1.0) == pytest.approx(1 / 16, rel=1e-15)


def test_fit_growth_recovers_synthetic_law():
    n = np.arange(1, 31, dtype=float)
    y = 0.3 + n * math.log(2.5) + 0.4 * n**1.7
    C, b, p = fit_growth(n, y)
    assert (C, b, p) == pytest.approx((2.5, 0.4, 1.7), rel=1e-6)


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
def test_amu_growth_power(mu):
    fit = check_amu_forward(None, 1.0, mu)
    assert abs(fit.p_hat - (1 + 1 / mu)) <= 0.1
    assert fit.ratio == pytest.approx(1.0, abs=0.1)


def test_amu_profile_callable_equals_default():
    a = check_amu_forward(None, 0.5, 1.0, n_max=10)
    b = check_amu_forward(weight_decay_profile(0.5, 1.0), 0.5, 1.0, n_max=10)
    np.testing.assert_array_equal(a.log_D, b.log_D)


def test_amu_accepts_fields(grid):
    fit = check_amu_forward(IsoSpectralField(grid, np.exp(-grid)), 1.0, 1.0, n_max=20)
    assert fit.log_D.size == 21


def test_gaussian_grows_slower_than_every_target():
    g = gaussian_growth()
    assert all(g.p_hat < 1 + 1 / mu for mu in (0.5, 1.0, 2.0))


def test_laplace_identity_and_bound():
    chk = check_laplace_integral(1.0, 1.0, 3)
    assert chk.identity_rel_err <= 1e-8
    assert chk.margin >= 0 and chk.passed


@pytest.mark.parametrize("n", range(1, 11))
def test_laplace_bound_mu2(n):
    chk = check_laplace_integral(1.0, 2.0, n)
    assert chk.passed and chk.margin >= 0


def test_laplace_small_mu_reports_ratio():
    chk = check_laplace_integral(1.0, 0.5, 4)
    assert chk.margin is None and chk.ratio > 0
    assert chk.identity_rel_err <= 1e-8


def test_laplace_explicit_grid_and_validation():
    chk = check_laplace_integral(1.0, 1.0, 2, t_grid=np.linspace(0, 4, 5))
    assert chk.identity_rel_err <= 1e-8
    with pytest.raises(DomainError):
        check_laplace_integral(1.0, 1.0, 0)


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0, 3.0])
def test_stationary_point(mu):
    t, dh, h, d2h = laplace_stationary_point(mu)
    assert t == pytest.approx((mu + 1) ** (-1 / mu))
    assert abs(dh) < 1e-15
    assert h > 0 and d2h < 0
