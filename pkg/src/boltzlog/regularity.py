"""Measurement of Fourier-side smoothing and derivative growth.

Two diagnostics live here:

* :func:`fit_beta` fits ``-log|phi|`` against ``((1/2) log(alpha + x))^{mu+1}``;
  the slope is the gained exponent ``beta t``.
* :func:`derivative_norms` and :func:`check_amu_forward` relate Fourier decay
  of the form ``exp(-tau (log<eta>)^{mu+1})`` to derivative growth
  ``log ||D^n f|| ~ b n^{1 + 1/mu}``; :func:`check_laplace_integral`
  checks the Laplace-type bound behind that relation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .collision import IsoSpectralField
from .errors import ConvergenceError, DomainError, ResolutionError
from .kernel import sphere_area
from .weights import log_weight_profile

NOISE_FLOOR = 1e-250
MIN_FIT_POINTS = 10
TAIL_FRACTION = 1e-12


@dataclass
class BetaFit:
    t: float
    beta_hat: float
    beta_t: float
    M_hat: float
    r_squared: float
    window: tuple[float, float]
    n_points: int

    def as_row(self) -> dict:
        return {
            "t": self.t,
            "beta_hat": self.beta_hat,
            "beta_t": self.beta_t,
            "M_hat": self.M_hat,
            "r_squared": self.r_squared,
            "window_lo": self.window[0],
            "window_hi": self.window[1],
            "n_points": self.n_points,
        }


def fit_beta(
    phi: IsoSpectralField,
    t: float,
    alpha: float,
    mu: float,
    x_window: tuple[float, float] | None = None,
    noise_floor: float = NOISE_FLOOR,
    reference: np.ndarray | None = None,
) -> BetaFit:
    """Least-squares fit of ``-log|phi| = beta t w(x) - log M`` on a window.

    ``w(x) = ((1/2) log(alpha + x))^{mu+1}``. The default window is
    ``[10 alpha, 0.8 x_max]``. Points with ``|phi|`` below ``noise_floor`` (or
    exactly zero, e.g. at sign changes) are dropped. With ``reference`` (the
    values of ``phi`` at ``t = 0`` on the same grid) the fit is applied to the
    gained decay ``-log|phi / reference|`` instead.
    """
    if not t > 0:
        raise DomainError("the smoothing fit needs t > 0")
    x = phi.x_grid
    lo, hi = x_window if x_window is not None else (10.0 * alpha, 0.8 * x[-1])
    vals = np.abs(phi.values)
    mask = (x >= lo) & (x <= hi) & (vals > noise_floor)
    if reference is not None:
        ref = np.abs(np.asarray(reference, dtype=float))
        mask &= ref > noise_floor
    if mask.sum() < MIN_FIT_POINTS:
        raise DomainError(f"only {int(mask.sum())} usable points in window [{lo:.4g}, {hi:.4g}]; need {MIN_FIT_POINTS}")
    w = log_weight_profile(x[mask], alpha, mu)
    y = -np.log(vals[mask])
    if reference is not None:
        y = y + np.log(ref[mask])
    A = np.column_stack([w, np.ones_like(w)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, icpt])
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    return BetaFit(float(t), float(slope / t), float(slope), float(math.exp(-icpt)), r2, (float(lo), float(hi)), int(mask.sum()))


# --- derivative growth -----------------------------------------------------


def derivative_norms(phi: IsoSpectralField, n_max: int, tail_tol: float = TAIL_FRACTION) -> np.ndarray:
    """``D_n = ||D^n f||_{L^2}`` summed over multi-indices, ``n = 0..n_max``.

    ``D_n^2 = (2 pi)^{2n} int x^n phi(x)^2 omega_d(x) dx``, evaluated with the
    trapezoid rule in ``rho = sqrt(x)``.

    Raises
    ------
    ResolutionError
        If the last tenth of the grid (in ``rho``) carries more than
        ``tail_tol`` of any integral; the message names a sufficient ``x_max``.
    """
    if not 0 <= n_max <= 30:
        raise DomainError(f"n_max must lie in 0..30, got {n_max}")
    x, d = phi.x_grid, phi.d
    rho = np.sqrt(x)
    base = phi.values**2 * sphere_area(d - 1) * rho ** (d - 1)
    tail = rho >= 0.9 * rho[-1]
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        integrand = base * x**n
        total = np.trapezoid(integrand, rho)
        tail_part = np.trapezoid(integrand[tail], rho[tail])
        if not total > 0 or tail_part > tail_tol * total:
            raise ResolutionError(
                f"derivative norm n={n} not resolved: tail share {tail_part / max(total, 1e-300):.2e}; "
                f"try x_max >= {_required_x_max(x, integrand, tail_tol):.4g}",
                required_x_max=_required_x_max(x, integrand, tail_tol),
            )
        out[n] = math.sqrt(total) * (2.0 * math.pi) ** n
    return out


def _required_x_max(x, integrand, tol):
    # extrapolate the integrand's log-decay over the last tenth of the grid
    rho = np.sqrt(x)
    sel = rho >= 0.9 * rho[-1]
    y = np.log(np.maximum(np.abs(integrand[sel]), 1e-300))
    slope = np.polyfit(rho[sel], y, 1)[0]
    if slope >= 0:
        return float(4.0 * x[-1])
    peak = np.log(np.max(np.abs(integrand)))
    need = rho[-1] + max(0.0, (y[-1] - peak - math.log(tol)) / -slope)
    return float(need**2)


def log_derivative_norms_profile(log_abs_phi_s: Callable[[np.ndarray], np.ndarray], n_max: int, d: int = 3, s_lo: float = -200.0, n_nodes: int = 200001) -> np.ndarray:
    """``log D_n`` for a radial profile given through ``s -> log|phi|(e^s)``.

    The integral is taken in ``s = log x`` and kept in log space, so profiles
    that decay too slowly to sit on an ``x``-grid (for instance
    ``exp(-tau (log<eta>)^{3/2})``) are handled. The upper end of the ``s``
    range is doubled until the integrand for ``n_max`` is negligible there.
    """
    const = math.log(0.5 * sphere_area(d - 1))
    s_hi = 50.0
    for _ in range(40):
        s = np.linspace(s_lo, s_hi, n_nodes)
        base = 2.0 * log_abs_phi_s(s) + 0.5 * d * s + const
        g = base + n_max * s
        if g[-1] < np.max(g) + math.log(TAIL_FRACTION) - 5.0:
            break
        s_hi *= 2.0
    else:
        raise ResolutionError(f"profile integrand for n={n_max} does not decay up to s={s_hi:.4g}")
    ds = s[1] - s[0]
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        g = base + n * s
        gmax = float(np.max(g))
        if max(g[0], g[-1]) > gmax + math.log(TAIL_FRACTION) - 5.0:
            raise ResolutionError(f"profile integrand for n={n} is not negligible at the ends of [{s_lo}, {s_hi}]")
        integral = float(np.trapezoid(np.exp(g - gmax), dx=ds))
        out[n] = 0.5 * (gmax + math.log(integral)) + n * math.log(2.0 * math.pi)
    return out


def weight_decay_profile(tau: float, mu: float, alpha: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """``s -> log phi(e^s)`` for ``phi = exp(-tau ((1/2) log(alpha + x))^{mu+1})``."""
    la = math.log(alpha)
    return lambda s: -tau * (0.5 * np.logaddexp(la, s)) ** (mu + 1.0)


def b_predicted(tau: float, mu: float) -> float:
    """Per-norm growth constant ``tau^{-1/mu} mu (mu+1)^{-(1+1/mu)}``."""
    return tau ** (-1.0 / mu) * mu * (mu + 1.0) ** (-(1.0 + 1.0 / mu))


@dataclass
class GrowthFit:
    n: np.ndarray
    log_D: np.ndarray
    C_hat: float
    b_hat: float
    p_hat: float
    b_pred: float | None
    p_expected: float | None
    extras: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.b_hat / self.b_pred if self.b_pred else float("nan")


def _lsq(n, y, p):
    A = np.column_stack([np.ones_like(n), n, n**p])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef, float(np.sum((y - A @ coef) ** 2))


def fit_growth(n: np.ndarray, log_D: np.ndarray, p_fixed: float | None = None, p_bounds: tuple[float, float] = (1.0001, 6.0)) -> tuple[float, float, float]:
    """Fit ``log D_n = c0 + n log C + b n^p``.

    Returns ``(C, b, p)``. ``p`` is fitted by bounded scalar minimization of
    the residual unless ``p_fixed`` is given, in which case ``b`` and ``C``
    refer to that exponent.
    """
    n = np.asarray(n, dtype=float)
    y = np.asarray(log_D, dtype=float)
    if p_fixed is None:
        res = optimize.minimize_scalar(lambda p: _lsq(n, y, p)[1], bounds=p_bounds, method="bounded", options={"xatol": 1e-10})
        p = float(res.x)
    else:
        p = float(p_fixed)
    coef, _ = _lsq(n, y, p)
    return float(math.exp(coef[1])), float(coef[2]), p


def check_amu_forward(phi_with_weight_decay, tau: float, mu: float, n_max: int = 30, d: int = 3, n_min: int = 1) -> GrowthFit:
    """Derivative growth of data with Fourier decay ``exp(-tau (log<eta>)^{mu+1})``.

    ``phi_with_weight_decay`` may be an :class:`IsoSpectralField` (grid
    quadrature), a callable returning ``log|phi|(e^s)`` as a function of ``s = log x`` (log-space profile
    quadrature) or ``None`` for the exact profile with ``alpha = 1``.
    ``b_hat`` is fitted with the exponent fixed at ``1 + 1/mu`` and compared to
    :func:`b_predicted`; ``p_hat`` is the freely fitted exponent.
    """
    if isinstance(phi_with_weight_decay, IsoSpectralField):
        log_D = np.log(derivative_norms(phi_with_weight_decay, n_max))
    else:
        prof = phi_with_weight_decay or weight_decay_profile(tau, mu)
        log_D = log_derivative_norms_profile(prof, n_max, d)
    n = np.arange(n_max + 1)
    sel = n >= n_min
    p_exp = 1.0 + 1.0 / mu
    C_hat, b_hat, _ = fit_growth(n[sel], log_D[sel], p_fixed=p_exp)
    _, _, p_hat = fit_growth(n[sel], log_D[sel])
    return GrowthFit(n, log_D, C_hat, b_hat, p_hat, b_predicted(tau, mu), p_exp)


def gaussian_growth(n_max: int = 30, d: int = 3, n_min: int = 1) -> GrowthFit:
    """Growth fit for the Maxwellian ``phi = exp(-x)`` (an entire function)."""
    log_D = log_derivative_norms_profile(lambda s: -np.exp(s), n_max, d, n_nodes=40001)
    n = np.arange(n_max + 1)
    sel = n >= n_min
    C_hat, b_hat, p_hat = fit_growth(n[sel], log_D[sel])
    return GrowthFit(n, log_D, C_hat, b_hat, p_hat, None, None)


def maxwellian_norms_exact(n_max: int, d: int = 3) -> np.ndarray:
    """``D_n`` for ``phi = exp(-x)``: ``(2 pi)^{2n} (|S^{d-1}|/2) Gamma(n + d/2) / 2^{n + d/2}``."""
    n = np.arange(n_max + 1)
    log_sq = 2 * n * math.log(2 * math.pi) + math.log(0.5 * sphere_area(d - 1)) + special.gammaln(n + 0.5 * d) - (n + 0.5 * d) * math.log(2.0)
    return np.exp(0.5 * log_sq)


# --- Laplace bound ----------------------------------------------------------


@dataclass
class LaplaceCheck:
    tau: float
    mu: float
    n: int
    log_lhs: float  # log of int_1^inf t^{2n-1} exp(-2 tau (log t)^{mu+1}) dt
    log_rhs: float  # log of the rescaled integral
    identity_rel_err: float
    log_bound: float | None
    margin: float | None  # bound - integral, relative to the integral
    ratio: float | None  # integral / bound, reported for mu < 1

    @property
    def passed(self) -> bool:
        ok = self.identity_rel_err <= 1e-8
        if self.margin is not None:
            ok = ok and self.margin >= 0
        return ok


def _log_quad(g: Callable[[float], float], peak: float, width: float, lower: float = 0.0) -> float:
    """``log int_lower^inf exp(g)`` by adaptive quadrature around the peak."""
    gmax = g(max(peak, lower))
    pts = sorted({max(lower, peak - k * width) for k in (8, 3, 1)} | {peak + k * width for k in (1, 3, 8)})
    pts = [p for p in pts if p > lower]
    edges = [lower] + pts
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda u: math.exp(g(u) - gmax), a, b, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    val, _ = integrate.quad(lambda u: math.exp(g(u) - gmax), edges[-1], np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    total += val
    if not total > 0:
        raise ConvergenceError("Laplace integral quadrature returned a non-positive value")
    return gmax + math.log(total)


def _log_gauss_legendre(g: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int = 400, order: int = 20) -> float:
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    nodes = (mid + half * xg).ravel()
    w = (half * wg).ravel()
    vals = g(nodes)
    gmax = float(np.max(vals))
    return gmax + math.log(float(np.dot(w, np.exp(vals - gmax))))


def check_laplace_integral(tau: float, mu: float, n: int, t_grid=None) -> LaplaceCheck:
    """Check the rescaling identity and, for ``mu >= 1``, the Laplace bound.

    Left side: ``int_1^inf t^{2n-1} exp(-2 tau (log t)^{mu+1}) dt``, computed
    as ``int_0^inf exp(2 n u - 2 tau u^{mu+1}) du`` with adaptive quadrature.
    Right side: ``(n/tau)^{1/mu} int_0^inf exp(k (s - s^{mu+1})) ds`` with
    ``k = 2 tau^{-1/mu} n^{1+1/mu}``, computed by composite Gauss-Legendre on
    ``t_grid`` (default ``[0, s_end]`` with the integrand negligible at
    ``s_end``). Both are kept in log space.
    """
    if not (tau > 0 and mu > 0 and n >= 1):
        raise DomainError("need tau > 0, mu > 0 and n >= 1")
    u_star = (n / (tau * (mu + 1.0))) ** (1.0 / mu)
    curv = 2.0 * tau * (mu + 1.0) * mu * u_star ** (mu - 1.0)
    log_lhs = _log_quad(lambda u: 2.0 * n * u - 2.0 * tau * u ** (mu + 1.0), u_star, 1.0 / math.sqrt(curv))

    k = 2.0 * tau ** (-1.0 / mu) * n ** (1.0 + 1.0 / mu)
    t_star = (mu + 1.0) ** (-1.0 / mu)
    h_star = mu * (mu + 1.0) ** (-(1.0 + 1.0 / mu))
    if t_grid is None:
        # beyond s_end the integrand is below exp(-60) relative to its peak
        s_end = t_star + 1.0
        while k * ((s_end - s_end ** (mu + 1.0)) - h_star) > -60.0:
            s_end *= 1.5
        a, b = 0.0, s_end
    else:
        a, b = float(np.min(t_grid)), float(np.max(t_grid))
    log_rhs = math.log(n / tau) / mu + _log_gauss_legendre(lambda s: k * (s - s ** (mu + 1.0)), a, b)
    rel = abs(math.expm1(log_rhs - log_lhs))

    log_bound = margin = ratio = None
    pref = (mu + 1.0) ** (-1.0 / mu) + math.sqrt(math.pi) / (2.0 * math.sqrt(mu)) * (tau / (mu + 1.0)) ** (1.0 / (2.0 * mu)) * n ** (-(mu + 1.0) / (2.0 * mu))
    log_bound = math.log(n / tau) / mu + math.log(pref) + k * h_star
    if mu >= 1.0:
        margin = math.expm1(log_bound - log_lhs)
    else:
        ratio = math.exp(log_lhs - log_bound)
    return LaplaceCheck(tau, mu, n, log_lhs, log_rhs, rel, log_bound, margin, ratio)


def laplace_stationary_point(mu: float) -> tuple[float, float, float, float]:
    """``(t*, h'(t*), h(t*), h''(t*))`` for ``h(t) = t - t^{mu+1}``."""
    t = (mu + 1.0) ** (-1.0 / mu)
    return t, 1.0 - (mu + 1.0) * t**mu, t - t ** (mu + 1.0), -(mu + 1.0) * mu * t ** (mu - 1.0)
