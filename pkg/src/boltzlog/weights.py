"""Logarithmic Fourier weights and their scalar inequalities.

Every function takes ``x = |eta|^2`` rather than ``|eta|``. The weight

    G(t, x) = exp(beta t ((1/2) log(alpha + x))^{mu + 1})

overflows for large ``beta t`` on wide grids, so it is built from
:func:`log_G_weight`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class WeightParams:
    """Parameters of the weight ``G``; ``lambda_cut=None`` means no cutoff."""

    alpha: float
    beta: float
    mu: float
    t: float = 0.0
    lambda_cut: float | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if not self.alpha >= math.exp(self.mu) * (1 - 1e-15):
            raise DomainError(f"alpha must be >= e^mu = {math.exp(self.mu):.6g}, got {self.alpha}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.t >= 0:
            raise DomainError(f"t must be nonnegative, got {self.t}")
        if self.lambda_cut is not None and not self.lambda_cut > 0:
            raise DomainError(f"lambda_cut must be positive, got {self.lambda_cut}")

    @property
    def bt(self) -> float:
        return self.beta * self.t

    def with_cut(self, lambda_cut: float | None) -> "WeightParams":
        return replace(self, lambda_cut=lambda_cut)


def bracket_alpha(eta_sq, alpha: float):
    """``sqrt(alpha + |eta|^2)``."""
    if alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    return np.sqrt(alpha + np.asarray(eta_sq, dtype=float))


def h_profile(s, alpha: float, mu: float):
    """``(log(alpha + s))^{mu + 1}``; increasing and concave for alpha >= e^mu."""
    return np.log(alpha + np.asarray(s, dtype=float)) ** (mu + 1.0)


def log_weight_profile(x, alpha: float, mu: float):
    """``((1/2) log(alpha + x))^{mu + 1}``, the exponent of G per unit ``beta t``."""
    return (0.5 * np.log(alpha + np.asarray(x, dtype=float))) ** (mu + 1.0)


def _inside(x, lambda_cut):
    x = np.asarray(x, dtype=float)
    if lambda_cut is None:
        return np.ones(x.shape, dtype=bool)
    return x <= lambda_cut * lambda_cut


def log_G_weight(x, p: WeightParams, cut: bool = True):
    """``log G``; ``-inf`` outside the cutoff ball when ``cut`` is set."""
    out = p.bt * log_weight_profile(x, p.alpha, p.mu)
    if cut and p.lambda_cut is not None:
        out = np.where(_inside(x, p.lambda_cut), out, -np.inf)
    return out


def G_weight(x, p: WeightParams, cut: bool = True):
    """``G(t, x)``, or ``G_Lambda`` when ``p.lambda_cut`` is set and ``cut`` is true."""
    out = np.exp(log_G_weight(x, p, cut))
    return float(out) if np.ndim(out) == 0 else out


def G_tilde(r, p: WeightParams):
    """``exp(beta t 2^{-mu-1} (log(alpha + r))^{mu+1})``, i.e. ``G`` as a function of ``|eta|^2``."""
    return np.exp(p.bt * 2.0 ** (-p.mu - 1.0) * h_profile(r, p.alpha, p.mu))


def _check_pair(s_minus, s_plus):
    sm = np.asarray(s_minus, dtype=float)
    sp = np.asarray(s_plus, dtype=float)
    if np.any(sm < 0) or np.any(sm > sp):
        raise DomainError("need 0 <= s_minus <= s_plus")
    return sm, sp


def subadditivity_factor(alpha: float, mu: float) -> float:
    return (mu + 1.0) / (1.0 + math.log(alpha))


def check_subadditivity(alpha: float, mu: float, s_minus, s_plus):
    """Margin ``q h(s-) + h(s+) - h(s- + s+)`` with ``q = (mu+1)/(1+log alpha)``.

    Vectorized over ``s_minus``/``s_plus``. The difference
    ``h(s+) - h(s- + s+)`` is formed from ``log1p`` to stay accurate when
    ``s-`` is tiny relative to ``s+``.
    """
    if not alpha >= math.exp(mu) * (1 - 1e-15):
        raise DomainError(f"alpha must be >= e^mu, got {alpha}")
    sm, sp = _check_pair(s_minus, s_plus)
    a = np.log(alpha + sp)
    b = a + np.log1p(sm / (alpha + sp))  # log(alpha + s- + s+)
    e = mu + 1.0
    # a^e - b^e = -a^e * expm1(e * log1p((b - a)/a))
    diff = -(a**e) * np.expm1(e * np.log1p((b - a) / a))
    out = subadditivity_factor(alpha, mu) * h_profile(sm, alpha, mu) + diff
    return float(out) if np.ndim(out) == 0 else out


def check_Gtilde_diff_bound(p: WeightParams, s_minus, s_plus):
    """Margin of the difference bound for ``G~`` at ``s = s- + s+``.

    RHS is ``2^{-mu} beta t (mu+1) (1 - s+/s) (log(alpha+s))^mu
    G~(s-)^{(mu+1)/(1+log alpha)} G~(s+)`` and LHS is ``|G~(s) - G~(s+)|``.
    Both sides are divided by ``G~(s+)`` before subtracting, which keeps the
    check finite when ``G~`` itself overflows.
    """
    sm, sp = _check_pair(s_minus, s_plus)
    s = sm + sp
    if np.any(s <= 0):
        raise DomainError("s = s_minus + s_plus must be positive")
    bt, mu, alpha = p.bt, p.mu, p.alpha
    c = bt * 2.0 ** (-mu - 1.0)
    a = np.log(alpha + sp)
    b = a + np.log1p(sm / (alpha + sp))
    e = mu + 1.0
    # log G~(s) - log G~(s+) = c (b^e - a^e) >= 0
    dlog = c * a**e * np.expm1(e * np.log1p((b - a) / a))
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lhs = np.expm1(dlog)
        log_lhs = dlog + np.log(-np.expm1(-dlog))
        log_rhs = (
            (math.log(2.0 ** (-mu) * e) + math.log(bt) if bt > 0 else -np.inf)
            + np.log(sm / s)
            + mu * np.log(b)
            + subadditivity_factor(alpha, mu) * c * h_profile(sm, alpha, mu)
        )
        rhs = np.exp(log_rhs)
        out = rhs - lhs
    # both sides beyond the float range: keep only the sign of the comparison
    huge = ~np.isfinite(lhs)
    out = np.where(huge, np.where(log_rhs >= log_lhs, np.inf, -np.inf), out)
    return float(out) if np.ndim(out) == 0 else out


def psi_alpha(r, alpha: float, mu: float):
    """``(log sqrt(alpha + r))^{mu+1}``."""
    return (0.5 * np.log(alpha + np.asarray(r, dtype=float))) ** (mu + 1.0)


@dataclass
class PsiReport:
    grows: bool
    r0: float
    sublinear_ok: bool
    scaling_violations: int
    scaling_checked: int
    min_scaling_margin: float
    worst: tuple[float, float] | None

    @property
    def passed(self) -> bool:
        return self.grows and self.sublinear_ok and self.scaling_violations == 0


def _psi_r0(alpha: float, mu: float) -> float:
    """Smallest r0 (up to bisection accuracy) beyond which psi(r) <= r.

    ``r - psi(r)`` is eventually increasing; scan a log grid for the last
    sign change and refine it by bisection.
    """
    r = np.concatenate([[0.0], np.logspace(-6, 12, 4001)])
    g = r - psi_alpha(r, alpha, mu)
    bad = np.nonzero(g < 0)[0]
    if bad.size == 0:
        return 0.0
    i = bad[-1]
    lo, hi = r[i], r[i + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - psi_alpha(mid, alpha, mu) < 0:
            lo = mid
        else:
            hi = mid
    return hi


def check_psi_properties(alpha: float, mu: float, R: float, grid: Iterable[tuple[float, float]], tol: float = 1e-12) -> PsiReport:
    """Check growth, eventual sublinearity and the scaling inequality for ``psi_alpha``.

    ``grid`` holds pairs ``(lam, x)`` with ``x = |eta|^2``; pairs with
    ``lam |eta| < R`` are skipped. The scaling check is
    ``psi(lam^2 x) >= lam^2 psi(x)``.
    """
    if not alpha >= math.exp(mu) * (1 - 1e-15):
        raise DomainError(f"alpha must be >= e^mu, got {alpha}")
    if R < 1:
        raise DomainError(f"R must be >= 1, got {R}")
    samples = psi_alpha(np.logspace(0, 300, 61), alpha, mu)
    # power-of-log growth: psi(r^2) / psi(r) -> 2^{mu+1} >= 2, so psi is unbounded
    grows = bool(np.all(np.diff(samples) > 0) and samples[-1] > 1.9 * samples[30])
    r0 = _psi_r0(alpha, mu)
    probe = r0 + np.logspace(-8, 15, 500) * max(r0, 1.0)
    sublinear_ok = bool(np.all(psi_alpha(probe, alpha, mu) <= probe))

    pairs = np.asarray(list(grid), dtype=float).reshape(-1, 2)
    lam, x = pairs[:, 0], pairs[:, 1]
    if np.any((lam < 0) | (lam > 1)):
        raise DomainError("lambda must lie in [0, 1]")
    active = lam * np.sqrt(x) >= R
    lhs = psi_alpha(lam[active] ** 2 * x[active], alpha, mu)
    rhs = lam[active] ** 2 * psi_alpha(x[active], alpha, mu)
    margin = lhs - rhs
    scale = np.maximum(1.0, np.abs(lhs))
    viol = margin < -tol * scale
    worst = None
    if margin.size:
        j = int(np.argmin(margin / scale))
        worst = (float(lam[active][j]), float(x[active][j]))
    return PsiReport(
        grows=grows,
        r0=float(r0),
        sublinear_ok=sublinear_ok,
        scaling_violations=int(viol.sum()),
        scaling_checked=int(active.sum()),
        min_scaling_margin=float(margin.min()) if margin.size else float("inf"),
        worst=worst,
    )
