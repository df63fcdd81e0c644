import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boltzlog.errors import ConvergenceError, DomainError
from boltzlog.kernel import (
    WEIGHTS,
    AngularKernel,
    eval_reduced_kernel,
    graded_rule,
    kernel_moment,
    momentum_transfer,
    mu_from_debye,
    panel_partial_sums,
    sphere_area,
)

# mpmath references at 30 digits for debye_yukawa_model d=3, kappa=1, mu=1
LAMBDA2 = 3.3869334755406224
SIN_D = 1.0780944091114061
CANCELLATION_I2 = 4.5389067687475530
SIN2_HALF = 2.1333895619714404
LAMBDA2_D2_MU25 = 2.1971650187638626


def test_sphere_area():
    assert sphere_area(0) == pytest.approx(2.0)
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    with pytest.raises(DomainError):
        sphere_area(-1)


def test_reduced_kernel_where_log_factor_is_one():
    k = AngularKernel(d=3, mu=1.0)
    assert eval_reduced_kernel(k, math.pi / math.e) == pytest.approx(2 * math.e, rel=1e-14)


def test_reduced_kernel_at_right_endpoint():
    k = AngularKernel(d=3, mu=2.0)
    expected = (2 / math.pi) * 2 * math.pi * math.log(2.0) ** 2
    assert eval_reduced_kernel(k, math.pi / 2) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("theta", [0.0, -0.1, 1.6, float("nan")])
def test_reduced_kernel_rejects_out_of_range(theta):
    with pytest.raises(DomainError):
        eval_reduced_kernel(AngularKernel(), theta)


def test_reduced_kernel_grazing_asymptotics():
    k = AngularKernel(d=3, kappa=1.7, mu=1.5)
    th = 10.0 ** -np.arange(2, 12)
    ratio = eval_reduced_kernel(k, th) * th / np.log(math.pi / th) ** k.mu
    np.testing.assert_allclose(ratio, k.kappa * k.sphere, rtol=1e-13)


def test_momentum_integrand_vanishes_monotonically():
    k = AngularKernel(d=3)
    th = 2.0 ** -np.arange(1, 41)
    # sin^d(theta) b(cos theta) = b~(theta) sin^2(theta) / |S^{d-2}|
    vals = eval_reduced_kernel(k, th) * np.sin(th) ** 2 / k.sphere
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] < 1e-9


@pytest.mark.parametrize(
    "weight, expected",
    [("two_sc", LAMBDA2), ("sin_d", SIN_D), ("cancellation_I2", CANCELLATION_I2), ("sin2_half", SIN2_HALF)],
)
def test_kernel_moments_match_reference(weight, expected):
    assert kernel_moment(AngularKernel(), weight) == pytest.approx(expected, rel=1e-12)


def test_lambda2_matches_independent_mpmath_quadrature():
    mp.mp.dps = 25
    ref = mp.quad(lambda t: 2 * mp.pi * mp.log(mp.pi / t) / t * mp.sin(t) ** 2 / 2, [0, 1e-8, 1e-3, mp.pi / 2])
    assert kernel_moment(AngularKernel()) == pytest.approx(float(ref), rel=1e-12)


def test_lambda2_d2_fractional_mu():
    k = AngularKernel(d=2, mu=2.5)
    assert kernel_moment(k) == pytest.approx(LAMBDA2_D2_MU25, rel=1e-12)
    # in d = 2 the sin_d weight is (1/2) sin^2 as well
    assert momentum_transfer(k) == pytest.approx(LAMBDA2_D2_MU25, rel=1e-12)


def test_two_sc_is_half_sin_squared():
    k = AngularKernel()
    assert kernel_moment(k, "two_sc") == pytest.approx(0.5 * kernel_moment(k, "sin2"), rel=1e-13)


def test_two_independent_meshes_agree():
    k = AngularKernel()
    assert kernel_moment(k, ratio=0.5) == pytest.approx(kernel_moment(k, ratio=0.3), rel=1e-10)


def test_cancellation_weight_series():
    th = np.array([1e-3])
    for d in (2, 3, 5):
        func, c2 = WEIGHTS["cancellation_I2"]
        assert func(th, d)[0] / (c2(d) * th[0] ** 2) == pytest.approx(1.0, rel=1e-4)


def test_cutoff_momentum_transfer_closed_form():
    k = AngularKernel(family="integrable_cutoff", d=2)
    assert momentum_transfer(k) == pytest.approx(math.pi / 4, rel=1e-13)


def test_power_law_momentum_transfer_grows_with_nu():
    vals = [momentum_transfer(AngularKernel(family="power_law_model", nu=nu)) for nu in (0.5, 0.8, 0.95, 0.99)]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] > 10 * vals[0]


def test_unknown_weight_rejected():
    with pytest.raises(DomainError):
        kernel_moment(AngularKernel(), "sin4")


@pytest.mark.filterwarnings("ignore:overflow")
def test_convergence_error_carries_partial_sum():
    with pytest.raises(ConvergenceError) as err:
        kernel_moment(AngularKernel(family="power_law_model", nu=0.999), tol=1e-300)
    assert err.value.partial > 0


def test_bare_kernel_partial_sums_diverge():
    sums = panel_partial_sums(AngularKernel(), levels=60)
    assert np.all(np.diff(sums) > 0)
    # each halving of theta adds about |S^1| log(pi/theta) log 2, which grows
    steps = np.diff(sums)
    assert steps[-1] > steps[10]


def test_weighted_partial_sums_converge_to_moment():
    k = AngularKernel()
    sums = panel_partial_sums(k, levels=60, weight="two_sc")
    assert sums[-1] == pytest.approx(kernel_moment(k), rel=1e-12)


def test_graded_rule_levels_and_tail():
    rule = graded_rule(AngularKernel())
    assert rule.levels == 12
    assert rule.nodes.size == 96
    assert rule.theta_min == pytest.approx(3.834951969714103e-4, rel=1e-14)
    approx = np.dot(rule.weights, 0.5 * np.sin(rule.nodes) ** 2) + 0.5 * rule.tail_per_c2
    assert approx == pytest.approx(LAMBDA2, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(mu=st.floats(0.1, 4.0), kappa=st.floats(0.1, 5.0), d=st.integers(2, 5))
def test_moments_scale_linearly_in_kappa(mu, kappa, d):
    base = kernel_moment(AngularKernel(d=d, mu=mu))
    assert kernel_moment(AngularKernel(d=d, mu=mu, kappa=kappa)) == pytest.approx(kappa * base, rel=1e-11)


@pytest.mark.parametrize("kw", [{"d": 1}, {"kappa": 0.0}, {"mu": -1.0}, {"family": "power_law_model", "nu": 1.0}])
def test_invalid_kernels_rejected(kw):
    with pytest.raises((DomainError, ValueError)):
        AngularKernel(**kw)


def test_mu_from_debye():
    assert mu_from_debye(3, 1.0) == (1.0, True)
    assert mu_from_debye(3, 2.0) == (0.0, False)
    assert mu_from_debye(2, 0.7).mu == -1.0
    assert not mu_from_debye(2, 0.7).admissible
    with pytest.raises(DomainError):
        mu_from_debye(3, 2.5)


def test_weight_without_quadratic_term_is_refined():
    from boltzlog.kernel import Weight

    quartic = Weight(lambda th, d: np.sin(0.5 * th) ** 4, lambda d: 0.0)
    # mpmath reference for int b~ sin^4(theta/2)
    assert kernel_moment(AngularKernel(), quartic) == pytest.approx(0.43992282420112924, rel=1e-12)
