"""Angular collision kernels and graded small-angle quadrature.

All kernels are represented through the reduced kernel

    b~(theta) = |S^{d-2}| sin^{d-2}(theta) b(cos theta),  0 < theta <= pi/2,

so that an angular average of a zonal function reads ``int b~(theta) w(theta) dtheta``.
The kernels are singular like ``1/theta`` (times a logarithmic or power factor)
at grazing angles, so moments are only defined against weights that vanish like
``theta**2``. The quadrature accumulates Gauss-Legendre panels on a geometric
mesh from ``pi/2`` toward 0 and closes the remaining ``(0, theta_J)`` interval
with the exact integral of the leading small-angle term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

THETA_MAX = 0.5 * math.pi
GL_POINTS = 8
MAX_LEVELS = 400


class KernelFamily(str, Enum):
    DEBYE_YUKAWA = "debye_yukawa_model"
    POWER_LAW = "power_law_model"
    INTEGRABLE_CUTOFF = "integrable_cutoff"


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^n in R^{n+1} (|S^0| = 2)."""
    if n < 0:
        raise DomainError(f"sphere dimension must be >= 0, got {n}")
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


@dataclass(frozen=True)
class AngularKernel:
    """Angular cross-section with a grazing singularity.

    ``kappa`` is the singularity strength. ``mu`` is used by the
    Debye-Yukawa model and ``nu`` by the power-law model.
    """

    family: KernelFamily = KernelFamily.DEBYE_YUKAWA
    d: int = 3
    kappa: float = 1.0
    mu: float = 1.0
    nu: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"dimension d must be an integer >= 2, got {self.d}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.family is KernelFamily.DEBYE_YUKAWA and not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if self.family is KernelFamily.POWER_LAW and not 0 < self.nu < 1:
            raise DomainError(f"nu must lie in (0, 1), got {self.nu}")

    @property
    def sphere(self) -> float:
        """|S^{d-2}|."""
        return sphere_area(self.d - 2)

    @property
    def theta_support(self) -> tuple[float, float]:
        return (0.0, THETA_MAX)

    def reduced(self, theta):
        """Vectorized reduced kernel without domain checks."""
        theta = np.asarray(theta, dtype=float)
        pref = self.kappa * self.sphere
        if self.family is KernelFamily.DEBYE_YUKAWA:
            return pref * np.log(math.pi / theta) ** self.mu / theta
        if self.family is KernelFamily.POWER_LAW:
            return pref * theta ** (-1.0 - 2.0 * self.nu)
        return np.full_like(theta, pref)

    def tail_integral(self, theta_j: float, c2: float) -> float:
        """Exact ``int_0^theta_j b~(theta) c2 theta^2 dtheta``."""
        pref = self.kappa * self.sphere * c2
        if self.family is KernelFamily.DEBYE_YUKAWA:
            # substitute u = 2 log(pi/theta)
            a = self.mu + 1.0
            u0 = 2.0 * math.log(math.pi / theta_j)
            upper = special.gammaincc(a, u0) * special.gamma(a)
            return pref * math.pi**2 * 2.0 ** (-a) * upper
        if self.family is KernelFamily.POWER_LAW:
            p = 2.0 - 2.0 * self.nu
            return pref * theta_j**p / p
        return pref * theta_j**3 / 3.0


def eval_reduced_kernel(k: AngularKernel, theta):
    """Evaluate ``b~(theta)``; raises :class:`DomainError` outside ``(0, pi/2]``."""
    th = np.asarray(theta, dtype=float)
    if np.any(~(th > 0)) or np.any(th > THETA_MAX * (1 + 1e-15)):
        raise DomainError("theta must lie in (0, pi/2]")
    out = k.reduced(th)
    return float(out) if np.ndim(out) == 0 else out


class Weight(NamedTuple):
    func: Callable[[np.ndarray, int], np.ndarray]
    c2: Callable[[int], float]  # leading coefficient of theta^2 at theta -> 0


def _cancellation_i2(theta, d):
    # cos^{-d}(theta/2) - 1 without cancellation for small theta
    return np.expm1(-0.5 * d * np.log1p(-np.sin(0.5 * theta) ** 2))


WEIGHTS: dict[str, Weight] = {
    "two_sc": Weight(lambda th, d: 0.5 * np.sin(th) ** 2, lambda d: 0.5),
    "sin_d": Weight(lambda th, d: np.sin(th) ** 2 / sphere_area(d - 2), lambda d: 1.0 / sphere_area(d - 2)),
    "cancellation_I2": Weight(_cancellation_i2, lambda d: d / 8.0),
    "sin2_half": Weight(lambda th, d: np.sin(0.5 * th) ** 2, lambda d: 0.25),
    "sin2": Weight(lambda th, d: np.sin(th) ** 2, lambda d: 1.0),
}


@lru_cache(maxsize=None)
def _gl_reference(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gl_points_for_ratio(ratio: float) -> int:
    """Gauss points per panel giving the same accuracy as 8 points at ratio 1/2.

    For an integrand analytic away from theta = 0, the convergence factor of
    Gauss-Legendre on ``[r a, a]`` is the Bernstein radius of the origin.
    """
    def radius(r):
        z = (1 + r) / (1 - r)
        return z + math.sqrt(z * z - 1)

    return max(GL_POINTS, math.ceil(GL_POINTS * math.log(radius(0.5)) / math.log(radius(ratio)) - 1e-9))


def panel_nodes(levels: int, ratio: float = 0.5, n_gl: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of ``levels`` geometric panels below ``pi/2``.

    Panel ``j`` covers ``[(pi/2) r^{j+1}, (pi/2) r^j]``. Nodes are returned
    panel by panel, starting next to ``pi/2``.
    """
    if not 0 < ratio < 1:
        raise DomainError(f"grading ratio must lie in (0, 1), got {ratio}")
    xg, wg = _gl_reference(n_gl or gl_points_for_ratio(ratio))
    hi = THETA_MAX * ratio ** np.arange(levels)
    lo = hi * ratio
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _resolve_weight(w) -> tuple[Callable, Callable]:
    if isinstance(w, str):
        if w not in WEIGHTS:
            raise DomainError(f"unknown weight {w!r}; choose from {sorted(WEIGHTS)}")
        return WEIGHTS[w]
    if isinstance(w, Weight):
        return w
    raise DomainError(f"weight must be a name or Weight, got {type(w).__name__}")


@dataclass(frozen=True)
class GradedRule:
    """A truncated graded rule plus the exact small-angle remainder factor.

    ``int_0^{pi/2} b~ w dtheta`` is approximated by
    ``sum(weights * w(nodes)) + tail_per_c2 * c2(w)``.
    """

    nodes: np.ndarray
    weights: np.ndarray  # quadrature weights times b~(nodes)
    theta_min: float
    tail_per_c2: float
    levels: int


def levels_for_tol(k: AngularKernel, tol: float, ratio: float = 0.5, c2: float = 1.0) -> int:
    """Smallest panel count whose remainder uncertainty drops below ``tol``.

    The closed-form remainder uses only the leading ``c2 theta^2`` term of the
    weight, so its relative error is O(theta_J^2).
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    theta_j = THETA_MAX
    tail = float("inf")
    for j in range(1, MAX_LEVELS + 1):
        theta_j *= ratio
        tail = k.tail_integral(theta_j, c2)
        if abs(tail) * theta_j**2 < tol:
            return j
    raise ConvergenceError(f"remainder still {tail:.3e} after {MAX_LEVELS} panels", partial=float("nan"))


def graded_rule(k: AngularKernel, tol: float = 1e-12, ratio: float = 0.5, levels: int | None = None) -> GradedRule:
    """Build the shared angular rule used by moments and the collision operator."""
    if levels is None:
        levels = levels_for_tol(k, tol, ratio)
    nodes, w = panel_nodes(levels, ratio)
    theta_min = THETA_MAX * ratio**levels
    return GradedRule(nodes, w * k.reduced(nodes), theta_min, k.tail_integral(theta_min, 1.0), levels)


def kernel_moment(k: AngularKernel, w="two_sc", tol: float = 1e-12, ratio: float = 0.5) -> float:
    """``int_0^{pi/2} b~(theta) w(theta) dtheta`` on the graded mesh.

    Panels are added from ``pi/2`` downward until the uncertainty of the
    closed-form small-angle remainder is below ``tol``; the remainder is then
    added to the panel sum.

    Raises
    ------
    ConvergenceError
        If the remainder does not become small within the panel budget; the
        exception carries the accumulated partial sum.
    """
    func, c2f = _resolve_weight(w)
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    c2 = c2f(k.d)
    xg, wg = _gl_reference(gl_points_for_ratio(ratio))
    total = 0.0
    hi = THETA_MAX
    for _ in range(MAX_LEVELS):
        lo = hi * ratio
        th = 0.5 * (hi + lo) + 0.5 * (hi - lo) * xg
        total += 0.5 * (hi - lo) * float(np.dot(wg, k.reduced(th) * func(th, k.d)))
        hi = lo
        tail = k.tail_integral(hi, c2)
        # a weight without a theta^2 term is O(theta^4): bound its remainder instead
        bound = abs(tail) if c2 != 0 else k.tail_integral(hi, 1.0)
        if bound * hi**2 < tol:
            return total + tail
    raise ConvergenceError(f"kernel moment did not converge within {MAX_LEVELS} panels", partial=total)


def momentum_transfer(k: AngularKernel, tol: float = 1e-12, ratio: float = 0.5) -> float:
    """``int_0^{pi/2} sin^d(theta) b(cos theta) dtheta``."""
    return kernel_moment(k, "sin_d", tol, ratio)


def panel_partial_sums(k: AngularKernel, levels: int, ratio: float = 0.5, weight=None) -> np.ndarray:
    """Cumulative panel sums of ``int b~ w`` with no remainder correction.

    With ``weight=None`` the integrand is the bare kernel, whose partial sums
    grow without bound as panels are added.
    """
    xg, wg = _gl_reference(gl_points_for_ratio(ratio))
    func = None if weight is None else _resolve_weight(weight)[0]
    sums = np.empty(levels)
    total = 0.0
    hi = THETA_MAX
    for j in range(levels):
        lo = hi * ratio
        th = 0.5 * (hi + lo) + 0.5 * (hi - lo) * xg
        vals = k.reduced(th) if func is None else k.reduced(th) * func(th, k.d)
        total += 0.5 * (hi - lo) * float(np.dot(wg, vals))
        sums[j] = total
        hi = lo
    return sums


class DebyeExponent(NamedTuple):
    mu: float
    admissible: bool  # mu > 0 is needed for the smoothing experiments


def mu_from_debye(d: int, s: float) -> DebyeExponent:
    """Logarithmic exponent produced by a Debye-Yukawa potential ``e^{-r^s}/r``.

    In three dimensions this is the established value ``2/s - 1``; other
    dimensions use ``(d - 2)/s - 1``, which disagrees with it at ``d = 3``.
    """
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    # s = 2 is admitted as the boundary case mu = 0 (flagged as inadmissible)
    if not 0 < s <= 2:
        raise DomainError(f"s must lie in (0, 2], got {s}")
    mu = 2.0 / s - 1.0 if d == 3 else (d - 2) / s - 1.0
    return DebyeExponent(mu, mu > 0)
