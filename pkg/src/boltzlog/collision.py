"""Fourier-side collision operator for Maxwellian molecules.

For a radial density the Fourier transform depends on ``x = |eta|^2`` only and
Bobylev's identity reduces the collision operator to

    Q(g, f)^(x) = int_0^{pi/2} b~(theta) [g(x s) f(x c) - g(0) f(x)] dtheta,

with ``s = sin^2(theta/2)`` and ``c = cos^2(theta/2)``. Gain and loss parts
diverge separately, so the bracket is always evaluated as one expression at
every angular node. Below the smallest panel the bracket is replaced by its
first-order expansion ``s x [g'(0) f(x) - g(0) f'(x)]``, integrated exactly.

Off-grid values come from local Lagrange interpolation whose stencils are
precomputed once per (grid, kernel) in a :class:`CollisionPlan` and applied
as sparse matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.ndimage import map_coordinates

from .errors import DomainError, ResourceGuardError
from .kernel import AngularKernel, graded_rule, sphere_area
from .weights import WeightParams, log_G_weight

DEFAULT_INTERP_ORDER = 5


def quadratic_grid(N: int, x_max: float) -> np.ndarray:
    """``x_i = x_max (i/N)^2``, i.e. uniform in ``rho = sqrt(x)``."""
    if N < 8:
        raise DomainError(f"need N >= 8, got {N}")
    if not x_max > 0:
        raise DomainError(f"x_max must be positive, got {x_max}")
    return x_max * (np.arange(N + 1) / N) ** 2


@dataclass
class IsoSpectralField:
    """Isotropic Fourier transform ``phi(x)`` sampled on ``x_grid``."""

    x_grid: np.ndarray
    values: np.ndarray
    d: int = 3
    interp_order: int = DEFAULT_INTERP_ORDER

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x_grid.ndim != 1 or self.x_grid.shape != self.values.shape:
            raise DomainError("x_grid and values must be 1-D arrays of equal length")
        if self.x_grid[0] != 0.0 or np.any(np.diff(self.x_grid) <= 0):
            raise DomainError("x_grid must start at 0 and be strictly increasing")
        if self.interp_order < 3 or self.x_grid.size <= self.interp_order:
            raise DomainError(f"interp_order must be >= 3 and below the grid size, got {self.interp_order}")

    @property
    def mass(self) -> float:
        return float(self.values[0])

    def with_values(self, values) -> "IsoSpectralField":
        return IsoSpectralField(self.x_grid, values, self.d, self.interp_order)

    def bochner_excess(self) -> float:
        """``max |phi| / phi(0) - 1``; positive values violate the Bochner bound."""
        return float(np.max(np.abs(self.values)) / self.values[0] - 1.0)

    def __call__(self, xq) -> np.ndarray:
        """Interpolate at ``xq`` inside ``[0, x_max]``."""
        idx, w = lagrange_stencil(self.x_grid, np.atleast_1d(xq), self.interp_order)
        return np.sum(self.values[idx] * w, axis=-1)


def plancherel_weight(x, d: int):
    """Radial Plancherel density ``(|S^{d-1}|/2) x^{d/2 - 1}``."""
    return 0.5 * sphere_area(d - 1) * np.asarray(x, dtype=float) ** (0.5 * d - 1.0)


def radial_integral(x_grid: np.ndarray, integrand: np.ndarray, d: int) -> float:
    """``int integrand(x) omega_d(x) dx`` over the grid.

    Written in ``rho = sqrt(x)`` the measure is ``|S^{d-1}| rho^{d-1} drho``;
    the trapezoid rule in ``rho`` is used, which is spectrally accurate on the
    quadratic grid for smooth integrands decaying before the grid end.
    """
    rho = np.sqrt(x_grid)
    return float(np.trapezoid(integrand * sphere_area(d - 1) * rho ** (d - 1), rho))


def _interval_index(x_grid: np.ndarray, xq: np.ndarray) -> np.ndarray:
    # left-closed: a query equal to a node uses the interval to its left
    j = np.searchsorted(x_grid, xq, side="left") - 1
    return np.clip(j, 0, x_grid.size - 2)


def lagrange_stencil(x_grid: np.ndarray, xq: np.ndarray, order: int, interval: np.ndarray | None = None, derivative: bool = False):
    """Indices and weights of local Lagrange interpolation of degree ``order``.

    The stencil is centred on the interval containing each query and clipped
    at the grid ends. With ``derivative`` the weights of the interpolant's
    first derivative are returned instead.
    """
    xq = np.asarray(xq, dtype=float)
    n = x_grid.size
    if interval is None:
        interval = _interval_index(x_grid, xq)
    start = np.clip(interval - (order - 1) // 2, 0, n - order - 1)
    idx = start[..., None] + np.arange(order + 1)
    nodes = x_grid[idx]
    diff = xq[..., None] - nodes
    P = order + 1
    w = np.ones(idx.shape)
    for j in range(P):
        for m in range(P):
            if m != j:
                w[..., j] *= 1.0 / (nodes[..., j] - nodes[..., m])
    if not derivative:
        for j in range(P):
            for m in range(P):
                if m != j:
                    w[..., j] *= diff[..., m]
        return idx, w
    dw = np.zeros(idx.shape)
    for j in range(P):
        for k in range(P):
            if k == j:
                continue
            term = np.ones(xq.shape)
            for m in range(P):
                if m != j and m != k:
                    term = term * diff[..., m]
            dw[..., j] += term
    return idx, w * dw


def _stencil_matrix(x_grid, xq, order, shape_rows):
    idx, w = lagrange_stencil(x_grid, xq.ravel(), order)
    P = order + 1
    indptr = np.arange(0, shape_rows * P + 1, P)
    return sparse.csr_matrix((w.ravel(), idx.ravel(), indptr), shape=(shape_rows, x_grid.size))


@dataclass
class CollisionPlan:
    """Precomputed angular rule and interpolation operators for one grid.

    ``S`` and ``C`` map grid values to the ``(n_x, n_theta)`` arrays of values
    at ``x s_k`` and ``x c_k``; ``D`` maps grid values to the left-interval
    derivative at each node, and ``d0`` holds the derivative weights at 0.
    """

    x_grid: np.ndarray
    kernel: AngularKernel
    order: int
    theta: np.ndarray
    weights: np.ndarray
    tail: float  # int_0^theta_min b~ sin^2(theta/2)
    S: sparse.csr_matrix
    C: sparse.csr_matrix
    D: sparse.csr_matrix
    d0_idx: np.ndarray
    d0_w: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @classmethod
    def build(cls, x_grid, kernel: AngularKernel, order: int = DEFAULT_INTERP_ORDER, tol: float = 1e-12, levels: int | None = None) -> "CollisionPlan":
        x_grid = np.asarray(x_grid, dtype=float)
        rule = graded_rule(kernel, tol=tol, levels=levels)
        th = rule.nodes
        s = np.sin(0.5 * th) ** 2
        c = np.cos(0.5 * th) ** 2
        n, K = x_grid.size, th.size
        xs = np.minimum(x_grid[:, None] * s[None, :], x_grid[-1])
        xc = np.minimum(x_grid[:, None] * c[None, :], x_grid[-1])
        S = _stencil_matrix(x_grid, xs, order, n * K)
        C = _stencil_matrix(x_grid, xc, order, n * K)
        left = np.maximum(np.arange(n) - 1, 0)
        idx, w = lagrange_stencil(x_grid, x_grid, order, interval=left, derivative=True)
        P = order + 1
        D = sparse.csr_matrix((w.ravel(), idx.ravel(), np.arange(0, n * P + 1, P)), shape=(n, n))
        i0, w0 = lagrange_stencil(x_grid, np.zeros(1), order, interval=np.zeros(1, dtype=int), derivative=True)
        return cls(x_grid, kernel, order, th, rule.weights, 0.25 * rule.tail_per_c2, S, C, D, i0[0], w0[0])

    def gather(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n, K = self.x_grid.size, self.n_theta
        return (self.S @ values).reshape(n, K), (self.C @ values).reshape(n, K)

    def derivative_at_zero(self, values: np.ndarray) -> float:
        return float(np.dot(self.d0_w, values[self.d0_idx]))

    def apply(self, g: np.ndarray, f: np.ndarray | None = None) -> np.ndarray:
        """``Q(g, f)^`` at every grid node; ``f=None`` means ``f = g``."""
        if f is None:
            gs, gc = self.gather(g)
            fc, fv = gc, g
        else:
            gs, _ = self.gather(g)
            _, fc = self.gather(f)
            fv = f
        bracket = gs * fc - g[0] * fv[:, None]
        q = bracket @ self.weights
        g0p = self.derivative_at_zero(g)
        fxp = self.D @ fv
        q += self.tail * self.x_grid * (g0p * fv - g[0] * fxp)
        q[0] = 0.0 if self.x_grid[0] == 0.0 else q[0]
        return q


_PLANS: dict = {}


def get_plan(x_grid, kernel: AngularKernel, order: int = DEFAULT_INTERP_ORDER, tol: float = 1e-12) -> CollisionPlan:
    """Cached :meth:`CollisionPlan.build`."""
    x_grid = np.asarray(x_grid, dtype=float)
    key = (x_grid.size, float(x_grid[-1]), hash(x_grid.tobytes()), kernel, order, tol)
    plan = _PLANS.get(key)
    if plan is None:
        if len(_PLANS) > 16:
            _PLANS.clear()
        plan = _PLANS[key] = CollisionPlan.build(x_grid, kernel, order, tol)
    return plan


def _check_kernel(phi: IsoSpectralField, k: AngularKernel):
    if k.d != phi.d:
        raise DomainError(f"kernel dimension {k.d} differs from field dimension {phi.d}")


def bobylev_Q_iso(phi: IsoSpectralField, k: AngularKernel, tol: float = 1e-12) -> IsoSpectralField:
    """Collision operator ``Q(phi, phi)^`` on the field's grid."""
    _check_kernel(phi, k)
    plan = get_plan(phi.x_grid, k, phi.interp_order, tol)
    return phi.with_values(plan.apply(phi.values))


def bobylev_Q_pair(g: IsoSpectralField, f: IsoSpectralField, k: AngularKernel, tol: float = 1e-12) -> np.ndarray:
    """Bilinear ``Q(g, f)^`` on a shared grid."""
    _check_same_grid(g, f)
    _check_kernel(f, k)
    plan = get_plan(f.x_grid, k, f.interp_order, tol)
    return plan.apply(g.values, f.values)


def _check_same_grid(g: IsoSpectralField, f: IsoSpectralField):
    if g.x_grid.shape != f.x_grid.shape or not np.array_equal(g.x_grid, f.x_grid):
        raise DomainError("fields live on different grids")


def coercivity_functional(g: IsoSpectralField, f: IsoSpectralField, k: AngularKernel, tol: float = 1e-12) -> float:
    """``-<Q(g, f), f>`` through the radial Plancherel pairing."""
    q = bobylev_Q_pair(g, f, k, tol)
    return -radial_integral(f.x_grid, q * f.values, f.d)


def _trilinear_parts(f: IsoSpectralField, p: WeightParams, k: AngularKernel, tol: float):
    if p.lambda_cut is None:
        raise DomainError("the commutation error needs a Fourier cutoff lambda_cut")
    _check_kernel(f, k)
    plan = get_plan(f.x_grid, k, f.interp_order, tol)
    x = f.x_grid
    inside = x <= p.lambda_cut**2
    fs, fc = plan.gather(f.values)
    s = np.sin(0.5 * plan.theta) ** 2
    c = np.cos(0.5 * plan.theta) ** 2
    return plan, x, inside, fs, fc, s, c


def commutation_error_lhs(f: IsoSpectralField, p: WeightParams, k: AngularKernel, tol: float = 1e-12) -> float:
    """``|<G_L Q(f, f) - Q(f, G_L f), G_L f>|`` for radial ``f``.

    The loss terms of the two collision operators cancel identically, leaving
    ``int omega int b~ f(xs) f(xc) [G(x) - G(xc)] G_L(x) f(x)`` on the ball.
    """
    plan, x, inside, fs, fc, s, c = _trilinear_parts(f, p, k, tol)
    if not np.any(inside):
        return 0.0
    xi = x[inside]
    lg = log_G_weight(xi, p, cut=False)
    lgc = log_G_weight(xi[:, None] * c[None, :], p, cut=False)
    # G(x) - G(xc) = G(x) (1 - exp(lgc - lg)), and G(x) G_L(x) f(x) carries the weight
    diff = -np.expm1(lgc - lg[:, None])
    inner = (fs[inside] * fc[inside] * diff) @ plan.weights
    integrand = np.zeros_like(x)
    integrand[inside] = inner * np.exp(2.0 * lg) * f.values[inside]
    return abs(radial_integral(x, integrand, f.d))


def commutation_error_rhs(f: IsoSpectralField, p: WeightParams, k: AngularKernel, tol: float = 1e-12) -> float:
    """Upper bound of :func:`commutation_error_lhs` on the same angular nodes."""
    plan, x, inside, fs, fc, s, c = _trilinear_parts(f, p, k, tol)
    if not np.any(inside) or p.bt == 0:
        return 0.0
    xi = x[inside]
    q = (p.mu + 1.0) / (1.0 + math.log(p.alpha))
    lgs = q * log_G_weight(xi[:, None] * s[None, :], p, cut=False)
    lgc = log_G_weight(xi[:, None] * c[None, :], p, cut=False)
    lg = log_G_weight(xi, p, cut=False)
    ang = np.abs(fs[inside]) * np.abs(fc[inside]) * s[None, :] * np.exp(lgs + lgc)
    inner = ang @ plan.weights
    prof = (0.5 * np.log(p.alpha + xi)) ** p.mu
    integrand = np.zeros_like(x)
    integrand[inside] = p.bt * (p.mu + 1.0) * prof * inner * np.exp(lg) * np.abs(f.values[inside])
    return radial_integral(x, integrand, f.d)


def trilinear_form(f: IsoSpectralField, p: WeightParams, k: AngularKernel, tol: float = 1e-12) -> float:
    """``int omega int b~ sin^2(theta/2) (log<eta>_alpha)^mu G_L(xc)|f(xc)| G_L(x)|f(x)|``."""
    plan, x, inside, fs, fc, s, c = _trilinear_parts(f, p, k, tol)
    if not np.any(inside):
        return 0.0
    xi = x[inside]
    lgc = log_G_weight(xi[:, None] * c[None, :], p, cut=False)
    ang = np.abs(fc[inside]) * s[None, :] * np.exp(lgc)
    lg = log_G_weight(xi, p, cut=False)
    # below theta_min, s G(xc)|f(xc)| is replaced by its leading term s G(x)|f(x)|
    inner = ang @ plan.weights + plan.tail * np.abs(f.values[inside]) * np.exp(lg)
    prof = (0.5 * np.log(p.alpha + xi)) ** p.mu
    integrand = np.zeros_like(x)
    integrand[inside] = prof * inner * np.exp(lg) * np.abs(f.values[inside])
    return radial_integral(x, integrand, f.d)


# --- anisotropic two-dimensional reference --------------------------------

MAX_2D_POINTS = 64


@dataclass
class Grid2DField:
    """Complex Fourier samples on the symmetric grid ``[-eta_max, eta_max]^2``.

    Nodes are ``-eta_max + j h`` with ``h = 2 eta_max/(n - 1)``; for even
    ``n`` the origin is not a node, and reflection ``eta -> -eta`` maps the
    grid onto itself.
    """

    n: int
    eta_max: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.n % 2 or self.values.shape != (self.n, self.n):
            raise DomainError("Grid2DField needs an even n and an n x n value array")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.eta_max, self.eta_max, self.n)

    @classmethod
    def from_radial(cls, func, n: int, eta_max: float) -> "Grid2DField":
        ax = np.linspace(-eta_max, eta_max, n)
        e1, e2 = np.meshgrid(ax, ax, indexing="ij")
        return cls(n, eta_max, func(e1**2 + e2**2).astype(complex))

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.values - np.conj(self.values[::-1, ::-1]))))

    def sample(self, e1, e2, order: int = 3) -> np.ndarray:
        h = 2.0 * self.eta_max / (self.n - 1)
        coords = np.array([(np.ravel(e1) + self.eta_max) / h, (np.ravel(e2) + self.eta_max) / h])
        re = map_coordinates(self.values.real, coords, order=order, mode="nearest")
        im = map_coordinates(self.values.imag, coords, order=order, mode="nearest")
        return (re + 1j * im).reshape(np.shape(e1))


def bobylev_Q_2d(f: Grid2DField, k: AngularKernel, n_theta: int = 20, interp_order: int = 5) -> Grid2DField:
    """Direct angular quadrature of the collision operator on a 2-D grid.

    ``n_theta`` is the number of graded panels in the deflection angle; both
    orientations ``+-theta`` of ``sigma`` relative to ``eta`` are summed.
    ``interp_order=1`` gives bilinear interpolation, which is too coarse to
    resolve the cancellation near equilibrium; the default is quintic. Output is set to zero
    outside the disc ``|eta| <= eta_max`` where ``eta_+-`` could leave the grid.
    """
    if k.d != 2:
        raise DomainError("the 2-D reference operator needs a d = 2 kernel")
    if f.n > MAX_2D_POINTS:
        raise ResourceGuardError(f"n = {f.n} exceeds the limit {MAX_2D_POINTS} of the 2-D reference")
    rule = graded_rule(k, levels=n_theta)
    # b~ already integrates over both orientations of sigma; split it evenly
    th, w = rule.nodes, 0.5 * rule.weights
    ax = f.axis
    e1, e2 = np.meshgrid(ax, ax, indexing="ij")
    r = np.hypot(e1, e2)
    f_here = f.values
    f_zero = f.sample(np.zeros(1), np.zeros(1), interp_order)[0]
    out = np.zeros_like(f.values)
    # sigma = rotation of eta/|eta| by theta:  eta_+ = (eta + |eta| sigma)/2
    for sign in (1.0, -1.0):
        cth, sth = np.cos(th), sign * np.sin(th)
        s1 = (e1[..., None] * cth - e2[..., None] * sth)
        s2 = (e1[..., None] * sth + e2[..., None] * cth)
        p1, p2 = 0.5 * (e1[..., None] + s1), 0.5 * (e2[..., None] + s2)
        m1, m2 = 0.5 * (e1[..., None] - s1), 0.5 * (e2[..., None] - s2)
        gain = f.sample(m1, m2, interp_order) * f.sample(p1, p2, interp_order)
        out += (gain - f_zero * f_here[..., None]) @ w
    out[r > f.eta_max] = 0.0
    return Grid2DField(f.n, f.eta_max, out)
