"""Time integration of the isotropic Fourier-side Boltzmann equation.

The state is ``phi(t, x)``, the Fourier transform of a radial density at
``x = |eta|^2``, advanced by ``d phi/dt = Q(phi, phi)^`` with classical RK4
or forward Euler on a fixed grid.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .collision import IsoSpectralField, get_plan, quadratic_grid
from .errors import BlowUpError, DomainError, StabilityError
from .kernel import AngularKernel, Weight, kernel_moment

log = logging.getLogger(__name__)

DEFAULT_N = 2048
DEFAULT_X_MAX = 400.0
DEFAULT_ORDER = 5
BOCHNER_STOP = 1e-6


class ICFamily(str, Enum):
    MAXWELLIAN = "maxwellian"
    BKW = "bkw"
    MATERN = "matern"
    TWO_TEMPERATURE = "two_temperature"


@dataclass(frozen=True)
class InitialCondition:
    """Mass-normalized radial initial data given by their Fourier transforms.

    maxwellian   ``exp(-c x)``
    bkw          ``(1 + a0 x) exp(-(e0 + a0) x)``
    matern       ``(1 + x)^(-p)``
    two_temperature  ``w exp(-c1 x) + (1 - w) exp(-c2 x)``
    """

    family: ICFamily
    c: float = 1.0
    a0: float = -0.2
    e0: float = 1.0
    p: float = 4.0
    c1: float = 0.5
    c2: float = 2.0
    w: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "family", ICFamily(self.family))

    def validate(self, d: int) -> None:
        f = self.family
        if f is ICFamily.MAXWELLIAN and not self.c > 0:
            raise DomainError(f"maxwellian needs c > 0, got {self.c}")
        if f is ICFamily.BKW:
            lo, hi = bkw_positive_range(self.e0, d)
            if not self.e0 > 0 or not lo <= self.a0 <= hi:
                raise DomainError(f"bkw needs e0 > 0 and a0 in [{lo:.6g}, 0] for a nonnegative density, got a0={self.a0}")
        if f is ICFamily.MATERN and not self.p >= d / 2 + 1:
            raise DomainError(f"matern needs p >= d/2 + 1 = {d / 2 + 1}, got {self.p}")
        if f is ICFamily.TWO_TEMPERATURE:
            if not (self.c1 > 0 and self.c2 > 0 and 0 <= self.w <= 1):
                raise DomainError("two_temperature needs c1, c2 > 0 and w in [0, 1]")

    def values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        f = self.family
        if f is ICFamily.MAXWELLIAN:
            return np.exp(-self.c * x)
        if f is ICFamily.BKW:
            return bkw_exact(x, 0.0, self.a0, self.e0, 0.0)
        if f is ICFamily.MATERN:
            return (1.0 + x) ** (-self.p)
        return self.w * np.exp(-self.c1 * x) + (1.0 - self.w) * np.exp(-self.c2 * x)

    def energy(self) -> float:
        """``m1 = -phi'(0)``."""
        f = self.family
        if f is ICFamily.MAXWELLIAN:
            return self.c
        if f is ICFamily.BKW:
            return self.e0
        if f is ICFamily.MATERN:
            return self.p
        return self.w * self.c1 + (1.0 - self.w) * self.c2

    def exact_moments(self, K: int = 4) -> np.ndarray:
        """Taylor moments ``m_k = (-1)^k phi^(k)(0)``."""
        ks = np.arange(K + 1)
        f = self.family
        if f is ICFamily.MAXWELLIAN:
            return self.c**ks
        if f is ICFamily.BKW:
            b = self.e0 + self.a0
            # phi = e^{-bx} + a x e^{-bx}
            return b**ks - self.a0 * ks * b ** np.maximum(ks - 1, 0)
        if f is ICFamily.MATERN:
            return np.array([math.prod(self.p + j for j in range(k)) for k in ks], dtype=float)
        return self.w * self.c1**ks + (1.0 - self.w) * self.c2**ks


def bkw_positive_range(e0: float, d: int) -> tuple[float, float]:
    """Interval of ``a0`` for which the BKW density is nonnegative."""
    return (-2.0 * e0 / (d + 2), 0.0)


def bkw_exact(x, t: float, a0: float, e0: float, lam2: float) -> np.ndarray:
    """``(1 + a x) exp(-(e0 + a) x)`` with ``a = a0 exp(-lam2 t / 2)``."""
    a = a0 * math.exp(-0.5 * lam2 * t)
    x = np.asarray(x, dtype=float)
    return (1.0 + a * x) * np.exp(-(e0 + a) * x)


class Integrator(str, Enum):
    RK4 = "rk4"
    EULER = "euler"


@dataclass
class SimConfig:
    kernel: AngularKernel
    ic: InitialCondition
    N: int = DEFAULT_N
    x_max: float = DEFAULT_X_MAX
    dt: float = 1e-3
    t_end: float = 1.0
    integrator: Integrator = Integrator.RK4
    snapshot_times: Sequence[float] = (0.0, 1.0)
    interp_order: int = DEFAULT_ORDER
    tol: float = 1e-12
    moment_every: int = 10
    moment_K: int = 4

    def __post_init__(self):
        self.integrator = Integrator(self.integrator)
        self.snapshot_times = tuple(sorted(float(t) for t in self.snapshot_times))
        self.validate()

    def validate(self) -> None:
        if not 0 < self.dt < self.t_end:
            raise DomainError(f"need 0 < dt < t_end, got dt={self.dt}, t_end={self.t_end}")
        if any(t < 0 or t > self.t_end * (1 + 1e-12) for t in self.snapshot_times):
            raise DomainError("snapshot_times must lie in [0, t_end]")
        if self.moment_every < 1:
            raise DomainError("moment_every must be >= 1")
        self.ic.validate(self.kernel.d)

    def grid(self) -> np.ndarray:
        return quadratic_grid(self.N, self.x_max)


class Moments(NamedTuple):
    m: np.ndarray
    condition: float
    ill_conditioned: bool
    uncertainty: np.ndarray  # rounding-level error bound per moment


def moments(phi: IsoSpectralField, K: int = 4, cond_limit: float = 1e12, rel_limit: float = 1e-3) -> Moments:
    """Taylor moments ``m_k = (-1)^k phi^(k)(0)`` from the first ``K + 3`` nodes.

    ``m0`` is the node value at 0; the others are the coefficients of the
    interpolating polynomial through the remaining nodes, computed from a
    column-scaled Vandermonde system. ``uncertainty[k]`` propagates a
    relative perturbation of ``1e-15`` in the node values through the
    inverse system; the result is flagged when the Vandermonde condition
    exceeds ``cond_limit`` or any uncertainty exceeds ``rel_limit`` times
    ``max(|m_k|, 1)``.
    """
    if not 0 <= K <= 4:
        raise DomainError(f"K must lie in 0..4, got {K}")
    n = K + 3
    x = phi.x_grid[:n]
    v = phi.values[:n]
    scale = x[-1]
    u = x[1:] / scale
    V = u[:, None] ** np.arange(1, n)[None, :]
    Vinv = np.linalg.inv(V)
    coef = np.linalg.solve(V, v[1:] - v[0])
    cond = float(np.linalg.cond(V))
    a = np.concatenate([[v[0]], coef / scale ** np.arange(1, n)])
    ks = np.arange(K + 1)
    fact = np.array([math.factorial(k) for k in ks], dtype=float)
    m = (-1.0) ** ks * fact * a[: K + 1]
    noise = 2e-15 * np.max(np.abs(v))
    unc = np.concatenate([[noise], np.abs(Vinv).sum(axis=1)[:K] * noise / scale ** np.arange(1, K + 1)]) * fact
    bad = cond > cond_limit or bool(np.any(unc > rel_limit * np.maximum(np.abs(m), 1.0)))
    return Moments(m, cond, bad, unc)


@dataclass
class Trajectory:
    snapshots: list[tuple[float, IsoSpectralField]] = field(default_factory=list)
    moment_series: list[tuple[float, np.ndarray]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    warnings_flags: dict = field(default_factory=dict, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    def moment_table(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.array([t for t, _ in self.moment_series])
        m = np.array([m for _, m in self.moment_series])
        return t, m

    def at(self, t: float) -> IsoSpectralField:
        for ts, fld in self.snapshots:
            if abs(ts - t) <= 1e-12 * max(1.0, abs(t)):
                return fld
        raise KeyError(f"no snapshot at t={t}")

    def conservation_residuals(self) -> dict[str, float]:
        _, m = self.moment_table()
        return {
            "mass": float(np.max(np.abs(m[:, 0] - m[0, 0]))),
            "energy": float(np.max(np.abs(m[:, 1] - m[0, 1]))),
        }


def _time_knots(cfg: SimConfig) -> np.ndarray:
    knots = np.unique(np.concatenate([[0.0, cfg.t_end], cfg.snapshot_times]))
    pieces = [knots[:1]]
    for a, b in zip(knots[:-1], knots[1:]):
        n = max(1, math.ceil((b - a) / cfg.dt - 1e-9))
        pieces.append(a + (b - a) * np.arange(1, n + 1) / n)
    out = np.concatenate(pieces)
    out[-1] = cfg.t_end
    return out


def rk4_step(rhs, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(cfg: SimConfig) -> Trajectory:
    """Advance the initial condition to ``cfg.t_end``.

    Steps are uniform between consecutive snapshot times with size at most
    ``dt``. Moments are recorded every ``moment_every`` steps and at every
    snapshot.

    Raises
    ------
    BlowUpError
        If the state becomes non-finite.
    StabilityError
        If ``max |phi|`` exceeds ``phi(0) (1 + 1e-6)``.
    """
    x = cfg.grid()
    plan = get_plan(x, cfg.kernel, cfg.interp_order, cfg.tol)
    y = cfg.ic.values(x)
    d = cfg.kernel.d
    traj = Trajectory()
    snaps = set(cfg.snapshot_times)

    def record(t, y, step, last=False):
        fld = IsoSpectralField(x, y.copy(), d, cfg.interp_order)
        on_snap = any(abs(t - s) <= 1e-12 * max(1.0, s) for s in snaps)
        if on_snap:
            traj.snapshots.append((float(t), fld))
            excess = fld.bochner_excess()
            if excess > 1e-8:
                traj.warnings.append(f"Bochner bound exceeded by {excess:.3e} at t={t:.6g}")
        if on_snap or last or step % cfg.moment_every == 0:
            est = moments(fld, cfg.moment_K)
            traj.moment_series.append((float(t), est.m))
            if est.ill_conditioned and not traj.warnings_flags.get("moments"):
                traj.warnings_flags["moments"] = True
                noisy = [k for k, (mk, uk) in enumerate(zip(est.m, est.uncertainty)) if uk > 1e-3 * max(abs(mk), 1.0)]
                traj.warnings.append(f"moments {noisy} are dominated by rounding on this grid (uncertainty {est.uncertainty.tolist()})")

    knots = _time_knots(cfg)
    record(0.0, y, 0)
    stepper = rk4_step if cfg.integrator is Integrator.RK4 else (lambda rhs, y, h: y + h * rhs(y))
    for step, (ta, tb) in enumerate(zip(knots[:-1], knots[1:]), start=1):
        y_new = stepper(plan.apply, y, tb - ta)
        if not np.all(np.isfinite(y_new)):
            raise BlowUpError(f"non-finite state after t={ta:.6g}", last_time=float(ta), last_state=y)
        if np.max(np.abs(y_new)) > y_new[0] * (1.0 + BOCHNER_STOP):
            raise StabilityError(f"Bochner bound violated at t={tb:.6g}; reduce dt", last_time=float(ta), last_state=y)
        y = y_new
        record(tb, y, step, last=step == len(knots) - 1)
    return traj


# --- closed moment hierarchy ------------------------------------------------


def _moment_weight(k: int, j: int) -> Weight:
    binom = math.comb(k, j)
    if j == 0:
        # s^k + c^k - 1 with c = 1 - s, accurate for small theta
        def func(th, d, k=k):
            s = np.sin(0.5 * th) ** 2
            return s**k + np.expm1(k * np.log1p(-s))

        return Weight(func, lambda d, k=k: -k / 4.0 if k >= 2 else 0.0)

    def func(th, d, k=k, j=j, b=binom):
        s = np.sin(0.5 * th) ** 2
        return b * s**j * (1.0 - s) ** (k - j)

    return Weight(func, lambda d, k=k, j=j, b=binom: b / 4.0 if j == 1 else 0.0)


@dataclass
class MomentSeries:
    times: np.ndarray
    m: np.ndarray  # shape (n_times, K + 1)


def moment_coefficients(k: AngularKernel, K: int = 4, tol: float = 1e-13) -> dict[tuple[int, int], float]:
    """Angular integrals driving the closed moment system.

    ``(k, 0)`` maps to ``int b~ (s^k + c^k - 1)`` and ``(k, j)`` for
    ``0 < j < k`` to ``int b~ C(k, j) s^j c^(k-j)``.
    """
    out = {}
    for kk in range(2, K + 1):
        out[(kk, 0)] = kernel_moment(k, _moment_weight(kk, 0), tol)
        for j in range(1, kk):
            out[(kk, j)] = kernel_moment(k, _moment_weight(kk, j), tol)
    return out


def moment_ode_oracle(k: AngularKernel, m0: Sequence[float], t_end: float, dt: float, times: Sequence[float] | None = None) -> MomentSeries:
    """Integrate the closed Taylor-moment system with RK4.

    ``m_k' = int b~ [sum_{0<j<k} C(k,j) s^j c^(k-j) m_j m_(k-j) + (s^k + c^k - 1) m_0 m_k]``.
    Output is sampled at ``times`` (default: every step).
    """
    m_init = np.asarray(m0, dtype=float)
    K = m_init.size - 1
    if K > 4:
        raise DomainError("the moment system is closed here only up to K = 4")
    coef = moment_coefficients(k, max(K, 2))

    def rhs(m):
        out = np.zeros_like(m)
        for kk in range(2, K + 1):
            acc = coef[(kk, 0)] * m[0] * m[kk]
            for j in range(1, kk):
                acc += coef[(kk, j)] * m[j] * m[kk - j]
            out[kk] = acc
        return out

    n = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / n
    grid = np.arange(n + 1) * h
    traj = np.empty((n + 1, K + 1))
    traj[0] = m_init
    m = m_init.copy()
    for i in range(n):
        m = rk4_step(rhs, m, h)
        if not np.all(np.isfinite(m)):
            raise BlowUpError("moment system blew up", last_time=float(grid[i]))
        traj[i + 1] = m
    if times is None:
        return MomentSeries(grid, traj)
    times = np.asarray(times, dtype=float)
    idx = np.rint(times / h).astype(int)
    if np.any(np.abs(idx * h - times) > 1e-9 * max(1.0, t_end)) or np.any(idx > n):
        raise DomainError("requested times must be multiples of the step inside [0, t_end]")
    return MomentSeries(times, traj[idx])


def relaxation_m2(t, m1: float, m2_0: float, lam2: float):
    """Closed-form ``m2(t) = m1^2 + (m2(0) - m1^2) exp(-lam2 t)``."""
    return m1 * m1 + (m2_0 - m1 * m1) * np.exp(-lam2 * np.asarray(t, dtype=float))


# --- physical-space diagnostic ------------------------------------------------


def reconstruct_physical_radial(phi: IsoSpectralField, r_grid, d: int = 3, tail_tol: float = 1e-8) -> np.ndarray:
    """Radial density ``f(r)`` from ``phi`` for ``d = 3``.

    With the transform ``f^(eta) = int f(v) exp(-2 pi i v.eta) dv``,
    ``f(r) = 4 pi int_0^inf rho^2 phi(rho^2) sinc(2 r rho) d rho`` where
    ``sinc(z) = sin(pi z)/(pi z)``. Warns if ``phi`` has not decayed by the
    grid end.
    """
    if d != 3:
        raise DomainError("physical reconstruction is implemented for d = 3 only")
    rho = np.sqrt(phi.x_grid)
    tail = abs(phi.values[-1]) * rho[-1] ** 3
    if tail > tail_tol * max(1.0, abs(phi.values[0])):
        warnings.warn(f"phi not decayed at the grid end (rho^3 |phi| = {tail:.2e}); reconstruction truncated", RuntimeWarning, stacklevel=2)
    r = np.atleast_1d(np.asarray(r_grid, dtype=float))
    integrand = (rho**2 * phi.values)[None, :] * np.sinc(2.0 * r[:, None] * rho[None, :])
    return 4.0 * math.pi * np.trapezoid(integrand, rho, axis=1)
