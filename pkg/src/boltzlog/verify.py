"""Numerical checks of the inequalities behind the smoothing estimate.

Each ``check_*`` function returns a :class:`CheckResult` ``(lhs, rhs, margin)``
with ``margin >= 0`` meaning the inequality holds on the discrete data.
:func:`run_inequality_suite` drives randomized sweeps of all checks and
collects them into a :class:`VerificationReport`. :func:`run_induction`
instantiates the constants of the frequency-ladder induction from a
simulated trajectory and replays the ladder on its snapshots.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .collision import (
    IsoSpectralField,
    coercivity_functional,
    commutation_error_lhs,
    commutation_error_rhs,
    get_plan,
    quadratic_grid,
    radial_integral,
    trilinear_form,
)
from .errors import DegenerateStateError, DomainError
from .kernel import AngularKernel, KernelFamily, kernel_moment, momentum_transfer
from .solver import Trajectory, moments
from .weights import WeightParams, check_Gtilde_diff_bound, check_psi_properties, check_subadditivity, h_profile, log_G_weight

DEFAULT_TOL_REPORT = 1e-10


class CheckResult(NamedTuple):
    lhs: float
    rhs: float
    margin: float

    def __float__(self) -> float:
        return self.margin


# --- report plumbing --------------------------------------------------------


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class CheckEntry:
    """One check or one aggregated sweep.

    For sweeps ``lhs``, ``rhs`` and ``margin`` belong to the worst instance;
    ``witnesses`` holds the inputs of every violating instance (capped).
    """

    check_id: str
    inputs: dict
    lhs: float
    rhs: float
    margin: float
    tol_report: float = DEFAULT_TOL_REPORT
    n_checked: int = 1
    n_violations: int = 0
    witnesses: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.n_violations == 0 and self.margin >= -self.tol_report

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("seconds")  # wall-clock time would break byte-identical reports
        d["pass"] = self.passed
        return _jsonable(d)


@dataclass
class VerificationReport:
    entries: list[CheckEntry] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, entry: CheckEntry) -> CheckEntry:
        self.entries.append(entry)
        return entry

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def violations(self) -> list[CheckEntry]:
        return [e for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "metadata": _jsonable(self.metadata), "pass": self.passed}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def sweep_entry(check_id: str, inputs: list[dict], lhs, rhs, margin, tol_report: float = DEFAULT_TOL_REPORT, max_witnesses: int = 50, summary: dict | None = None) -> CheckEntry:
    """Aggregate per-instance results into one entry keyed on the worst margin."""
    margin = np.asarray(margin, dtype=float)
    lhs = np.broadcast_to(np.asarray(lhs, dtype=float), margin.shape)
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), margin.shape)
    bad = ~(margin >= -tol_report)
    j = int(np.nanargmin(np.where(np.isnan(margin), -np.inf, margin))) if margin.size else 0
    wit = []
    for i in np.nonzero(bad)[0][:max_witnesses]:
        wit.append({"inputs": inputs[i] if i < len(inputs) else {}, "lhs": float(lhs[i]), "rhs": float(rhs[i]), "margin": float(margin[i])})
    info = dict(summary or {})
    if margin.size and j < len(inputs):
        info["worst"] = inputs[j]
    return CheckEntry(
        check_id,
        info,
        float(lhs[j]) if margin.size else 0.0,
        float(rhs[j]) if margin.size else 0.0,
        float(margin[j]) if margin.size else 0.0,
        tol_report,
        int(margin.size),
        int(bad.sum()),
        wit,
    )


# --- embedding bound --------------------------------------------------------


def embedding_constant(grad_sup: float, sup: float, d: int) -> float:
    """``L = (max{(d+2) ||grad h||_inf, ||h||_inf})^{d/(d+2)}``."""
    return max((d + 2) * grad_sup, sup) ** (d / (d + 2.0))


def _cube_rule(x: np.ndarray, n: int):
    xg, wg = np.polynomial.legendre.leggauss(n)
    u, w = 0.5 * (xg + 1.0), 0.5 * wg
    d = x.size
    sgn = np.where(x >= 0, 1.0, -1.0)
    grids = np.meshgrid(*([u] * d), indexing="ij")
    pts = x + sgn * np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.ones(pts.shape[0])
    for wg_ in np.meshgrid(*([w] * d), indexing="ij"):
        wts = wts * wg_.ravel()
    return pts, wts


def check_embedding(h: Callable[[np.ndarray], np.ndarray] | IsoSpectralField, x, grad_sup: float | None = None, sup: float | None = None, d: int | None = None, n_quad: int = 12) -> CheckResult:
    """Pointwise bound ``|h(x)| <= L (int_{Q_x} |h|^2)^{1/(d+2)}``.

    ``Q_x = x + [0,1]^d`` reflected coordinate-wise into the orthant of ``x``
    so that it points away from the origin. ``h`` is a callable on points of
    shape ``(n, d)`` or an :class:`IsoSpectralField` read as ``h(y) = phi(|y|^2)``.
    For a field the sup-norms default to ``phi(0)`` and the moment bound
    ``2 pi sqrt(m0 int |v|^2 f)`` on the gradient.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if d is None:
        d = h.d if isinstance(h, IsoSpectralField) else x.size
    if x.size != d:
        raise DomainError(f"point has {x.size} coordinates, expected {d}")
    if isinstance(h, IsoSpectralField):
        fld = h
        mom = moments(fld, 1).m
        if sup is None:
            sup = float(np.max(np.abs(fld.values)))
        if grad_sup is None:
            grad_sup = 2.0 * math.pi * math.sqrt(max(mom[0], 0.0) * fld.d * max(mom[1], 0.0) / (2.0 * math.pi**2))
        reach = (np.linalg.norm(x) + math.sqrt(d)) ** 2
        if reach > fld.x_grid[-1]:
            raise DomainError(f"cube around x leaves the grid (|y|^2 up to {reach:.4g} > x_max)")

        def h(y, fld=fld):
            return fld(np.sum(y * y, axis=-1))

    if grad_sup is None or sup is None:
        raise DomainError("grad_sup and sup are required for callable h")
    pts, wts = _cube_rule(x, n_quad)
    mass = float(np.dot(wts, np.abs(h(pts)) ** 2))
    lhs = float(np.abs(h(x[None, :]))[0])
    rhs = embedding_constant(grad_sup, sup, d) * mass ** (1.0 / (d + 2.0))
    return CheckResult(lhs, rhs, rhs - lhs)


# --- coercivity -------------------------------------------------------------


def estimate_Cg_tilde(g: IsoSpectralField) -> float:
    """``inf_{x > 0} (phi(0) - |phi(x)|) / min(x, 1)`` over the grid.

    The point ``x = 1`` is added by interpolation and the ``x -> 0`` limit
    ``-phi'(0)`` by the moment stencil. Beyond ``x_max`` the ratio is taken
    to be at least ``phi(0) - max |phi|`` over the last grid decile.

    Raises
    ------
    DegenerateStateError
        If the infimum is not positive.
    """
    x, v = g.x_grid, g.values
    phi0 = v[0]
    xs = x[1:]
    ratios = (phi0 - np.abs(v[1:])) / np.minimum(xs, 1.0)
    cands = [float(np.min(ratios)), float(moments(g, 1).m[1])]
    if x[-1] > 1.0:
        cands.append(float(phi0 - abs(g(1.0)[0])))
    cands.append(float(phi0 - np.max(np.abs(v[int(0.9 * v.size):]))))
    c = min(cands)
    if not c > 0:
        raise DegenerateStateError(f"C~_g = {c:.3e} is not positive; the state is degenerate")
    return c


@dataclass(frozen=True)
class CoercivityConstants:
    C_tilde_g: float
    theta0: float
    R: float
    C_chain: float  # lower-bound constant of the angular integral at high frequency
    C_I2: float
    mass: float
    mu: float

    @property
    def C_g(self) -> float:
        return 0.5 * self.C_tilde_g * self.C_chain

    @property
    def C_tilde(self) -> float:
        """Constant multiplying ``||f||^2`` in the lower bound."""
        return self.C_g * math.log(self.R) ** (self.mu + 1.0) + self.C_I2 * self.mass


def coercivity_constants(g: IsoSpectralField, k: AngularKernel, tol: float = 1e-12) -> CoercivityConstants:
    """Instantiate the lower-bound constants for the model Debye-Yukawa kernel.

    The model kernel equals ``kappa |S^{d-2}| theta^{-1} (log(pi/theta))^mu``
    on all of ``(0, pi/2]``, so the half-strength domination holds up to
    ``theta0 = pi/2``. ``R`` is the smallest admissible value with
    ``log R > log(pi/theta0)``.
    """
    if k.family is not KernelFamily.DEBYE_YUKAWA:
        raise DomainError("the coercivity constants are instantiated for the Debye-Yukawa model only")
    mu = k.mu
    theta0 = 0.5 * math.pi
    R = max(math.sqrt(math.e), 1.0 / theta0 + 1.0, (math.pi / theta0) ** 2)
    ratio = math.log(math.pi / theta0) / math.log(R)
    C_chain = 0.5 * k.kappa * k.sphere / (4.0 * math.pi**2 * (mu + 1.0)) * (1.0 - ratio ** (mu + 1.0))
    C_I2 = kernel_moment(k, "cancellation_I2", tol)
    return CoercivityConstants(estimate_Cg_tilde(g), theta0, R, C_chain, C_I2, float(g.values[0]), mu)


def plancherel_norm_sq(f: IsoSpectralField, weight: np.ndarray | None = None) -> float:
    vals = f.values**2 if weight is None else weight * f.values**2
    return radial_integral(f.x_grid, vals, f.d)


def coercivity_rhs(f: IsoSpectralField, consts: CoercivityConstants, alpha: float) -> float:
    """Lower bound for ``-<Q(g, f), f>``; ``log<eta>_alpha`` enters through its positive part."""
    if alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    mu = consts.mu
    with np.errstate(divide="ignore"):
        lw = np.maximum(0.5 * np.log(alpha + f.x_grid), 0.0) ** (mu + 1.0)
    weighted = plancherel_norm_sq(f, lw)
    plain = plancherel_norm_sq(f)
    return consts.C_g / math.log(alpha + math.e) ** (mu + 1.0) * weighted - consts.C_tilde * plain


def check_coercivity(g: IsoSpectralField, f: IsoSpectralField, k: AngularKernel, alpha: float, consts: CoercivityConstants | None = None, tol: float = 1e-12) -> CheckResult:
    """``-<Q(g,f),f>`` against the weighted lower bound with measured constants."""
    if consts is None:
        consts = coercivity_constants(g, k, tol)
    lhs = coercivity_functional(g, f, k, tol)
    rhs = coercivity_rhs(f, consts, alpha)
    return CheckResult(lhs, rhs, lhs - rhs)


# --- commutation and trilinear bounds --------------------------------------


def check_commutation_inequality(f: IsoSpectralField, p: WeightParams, k: AngularKernel, tol: float = 1e-12) -> CheckResult:
    """Commutation error of the truncated weight against its bound."""
    lhs = commutation_error_lhs(f, p, k, tol)
    rhs = commutation_error_rhs(f, p, k, tol)
    return CheckResult(lhs, rhs, rhs - lhs)


def c_bd_constant(k: AngularKernel, tol: float = 1e-12) -> float:
    """``(1/2) max{1, 2^{mu-1}} max{2^{d-1-mu} (log 2)^mu, 1 + 2^{d-1}} |S^{d-2}| int sin^d b``."""
    mu, d = k.mu, k.d
    pref = 0.5 * max(1.0, 2.0 ** (mu - 1.0)) * max(2.0 ** (d - 1 - mu) * math.log(2.0) ** mu, 1.0 + 2.0 ** (d - 1))
    return pref * k.sphere * momentum_transfer(k, tol)


def check_trilinear_bound(f: IsoSpectralField, p: WeightParams, k: AngularKernel, tol: float = 1e-12, c_bd: float | None = None) -> CheckResult:
    """Trilinear form against ``c_bd (||G_L f||^2 + ||(log<D>_alpha)^{mu/2} G_L f||^2)``."""
    if p.lambda_cut is None:
        raise DomainError("the trilinear bound needs a Fourier cutoff lambda_cut")
    if c_bd is None:
        c_bd = c_bd_constant(k, tol)
    lhs = trilinear_form(f, p, k, tol)
    G2 = np.exp(2.0 * log_G_weight(f.x_grid, p))
    prof = (0.5 * np.log(p.alpha + f.x_grid)) ** p.mu
    rhs = c_bd * (plancherel_norm_sq(f, G2) + plancherel_norm_sq(f, prof * G2))
    return CheckResult(lhs, rhs, rhs - lhs)


# --- induction --------------------------------------------------------------


def alpha_star(d: int, mu: float) -> float:
    return math.exp(0.5 * d + 0.5 * (d + 2) * mu)


def exponent_identity_residual(d: int, mu: float) -> float:
    """``(mu+1)/(1 + log alpha*) - 2/(d+2)``."""
    return (mu + 1.0) / (1.0 + math.log(alpha_star(d, mu))) - 2.0 / (d + 2.0)


def lambda0(d: int) -> float:
    return 2.0 * math.sqrt(d) / (math.sqrt(2.0) - 1.0)


LADDER_RATIO = 0.5 * (1.0 + math.sqrt(2.0))


def lambda_ladder(n_levels: int, d: int) -> np.ndarray:
    return lambda0(d) * LADDER_RATIO ** np.arange(n_levels)


def beta0(alpha: float, M: float, T0: float, C_f0: float, mu: float, c_bd: float) -> float:
    """``C_f0/(log(e+alpha))^{mu+1} * log(alpha)/(log(alpha) + 2 T0 (mu+1) c_bd M)``."""
    if not (M > 0 and T0 >= 0 and C_f0 > 0 and c_bd > 0 and mu > 0):
        raise DomainError("beta0 needs M, C_f0, c_bd, mu > 0 and T0 >= 0")
    if not alpha >= math.exp(mu) * (1 - 1e-15):
        raise DomainError(f"alpha must be >= e^mu, got {alpha}")
    la = math.log(alpha)
    return C_f0 / math.log(math.e + alpha) ** (mu + 1.0) * la / (la + 2.0 * T0 * (mu + 1.0) * c_bd * M)


@dataclass
class InductionState:
    d: int
    mu: float
    T0: float
    alpha_star: float
    lambda0: float
    B1: float
    B2: float
    A: float
    M: float
    C_f0: float
    C_tilde_f0: float
    c_bd: float
    beta0: float
    beta_tilde: float
    beta_tilde_closed_form: float
    beta: float

    @property
    def q_star(self) -> float:
        return (self.mu + 1.0) / (1.0 + math.log(self.alpha_star))

    def lambda_ladder(self, n_levels: int) -> np.ndarray:
        return self.lambda0 * LADDER_RATIO ** np.arange(n_levels)

    def as_dict(self) -> dict:
        out = _jsonable(asdict(self))
        out["q_star"] = self.q_star
        return out


@dataclass
class LadderRow:
    N: int
    Lambda: float
    sup_value: float
    margin: float
    passed: bool

    def as_row(self) -> dict:
        return {"N": self.N, "Lambda": self.Lambda, "sup": self.sup_value, "margin": self.margin, "pass": self.passed}


@dataclass
class InductionReport:
    state: InductionState
    rows: list[LadderRow]
    N_max: int  # largest N with every rung 0..N passing; -1 if rung 0 fails
    beta_ladder_limit: float | None  # largest beta for which every resolved rung passes
    notes: list[str] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)


class _HypData(NamedTuple):
    times: np.ndarray
    absphi: list[np.ndarray]
    rho: np.ndarray
    drho: np.ndarray


def _hyp_sup(data: _HypData, Lam: float, beta: float, alpha: float, mu: float, q: float, B1: float) -> float:
    """Sup over snapshots of ``G^q |phi|`` on ``|xi| <= Lam`` with a sub-grid Lipschitz allowance."""
    rho, drho = data.rho, data.drho
    sel = rho[:-1] <= Lam
    top = np.minimum(rho[1:][sel], Lam)
    w = (0.5 * np.log(alpha + top**2)) ** (mu + 1.0)
    best = -np.inf
    with np.errstate(over="ignore"):
        for t, a in zip(data.times, data.absphi):
            val = np.exp(q * beta * t * w) * (a[:-1][sel] + 2.0 * math.pi * B1 * drho[sel])
            best = max(best, float(np.max(val)))
    return best


def _bisect_largest(pred: Callable[[float], bool], lo: float = 1e-14, hi: float = 1e4, iters: int = 80) -> float:
    """Largest ``beta`` in ``[lo, hi]`` with ``pred(beta)``, assuming monotonicity in beta."""
    if not pred(lo):
        return 0.0
    if pred(hi):
        return hi
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(iters):
        mid = 0.5 * (llo + lhi)
        if pred(math.exp(mid)):
            llo = mid
        else:
            lhi = mid
    return math.exp(llo)


def check_snapshot_density(times: np.ndarray, T0: float, min_count: int = 5) -> None:
    """Raise if the snapshots do not cover ``[0, T0]`` densely enough."""
    ts = np.sort(times[times <= T0 * (1 + 1e-12)])
    gap_limit = T0 / (min_count - 1)
    if ts.size < min_count or ts[0] > 1e-12 or abs(ts[-1] - T0) > 1e-9 * max(1.0, T0) or np.max(np.diff(ts)) > gap_limit * (1 + 1e-9):
        raise DomainError(
            f"snapshots too coarse for the ladder replay: need at least {min_count} snapshots on [0, {T0:g}] "
            f"including both ends with gaps <= {gap_limit:g}; got {ts.size} with times {np.round(ts, 6).tolist()}"
        )


def induction_constants(phi0: IsoSpectralField, k: AngularKernel, T0: float, mu: float | None = None, tol: float = 1e-12) -> InductionState:
    """Constants of the ladder induction measured from the initial datum.

    ``beta_tilde`` and ``beta`` are left at ``nan``; :func:`run_induction`
    fills them in.
    """
    mu = k.mu if mu is None else mu
    d = phi0.d
    a_star = alpha_star(d, mu)
    cc = coercivity_constants(phi0, k, tol)
    C_f0, C_tilde_f0 = cc.C_g, cc.C_tilde
    mom = moments(phi0, 1).m
    B1 = float(mom[0] + d * mom[1] / (2.0 * math.pi**2))
    A = C_tilde_f0 + C_f0 * math.log(a_star) / (2.0 * math.log(math.e + a_star) ** (mu + 1.0))
    B2 = math.sqrt(plancherel_norm_sq(phi0)) * math.exp(T0 * A)
    M = max(2.0 * B1 + 1.0, (2.0 * math.pi * (d + 2) * B1 * B2 ** (2.0 / d)) ** (d / (d + 2.0)))
    cbd = c_bd_constant(k, tol)
    b0 = beta0(a_star, M, T0, C_f0, mu, cbd)
    q_star = 2.0 / (d + 2.0)
    L0 = lambda0(d)
    closed = math.log(M / B1) / (q_star * T0 * (0.5 * math.log(a_star + L0**2)) ** (mu + 1.0)) if T0 > 0 else float("inf")
    return InductionState(d, mu, T0, a_star, L0, B1, B2, A, M, C_f0, C_tilde_f0, cbd, b0, float("nan"), closed, float("nan"))


def run_induction(
    traj: Trajectory,
    k: AngularKernel,
    mu: float | None = None,
    T0: float | None = None,
    beta: float | None = None,
    find_limit: bool = True,
    tol: float = 1e-12,
) -> InductionReport:
    """Replay the frequency ladder ``Hyp_{Lambda_N}(M)`` on a trajectory.

    ``beta`` defaults to ``min(beta0(alpha*), beta~)`` where ``beta~`` is the
    largest value (by bisection) for which ``Hyp_{Lambda_0}(M)`` holds on the
    snapshots. Rungs are checked while ``Lambda_N`` stays inside the grid.
    With ``find_limit`` the largest ``beta`` passing every resolved rung is
    also reported.
    """
    times = traj.times
    if T0 is None:
        T0 = float(times.max())
    check_snapshot_density(times, T0)
    snaps = [(t, f) for t, f in traj.snapshots if t <= T0 * (1 + 1e-12)]
    phi0 = snaps[0][1]
    state = induction_constants(phi0, k, T0, mu, tol)
    rho = np.sqrt(phi0.x_grid)
    data = _HypData(np.array([t for t, _ in snaps]), [np.abs(f.values) for _, f in snaps], rho, np.diff(rho))
    mu_, a_star, q, B1, M = state.mu, state.alpha_star, state.q_star, state.B1, state.M

    def hyp(Lam, b):
        return _hyp_sup(data, Lam, b, a_star, mu_, q, B1)

    state.beta_tilde = _bisect_largest(lambda b: hyp(state.lambda0, b) <= M)
    state.beta = min(state.beta0, state.beta_tilde) if beta is None else float(beta)
    n_levels = int(math.floor(math.log(rho[-1] / state.lambda0) / math.log(LADDER_RATIO))) + 1
    ladder = state.lambda_ladder(max(n_levels, 0))
    rows = []
    for N, Lam in enumerate(ladder):
        s = hyp(Lam, state.beta)
        rows.append(LadderRow(N, float(Lam), s, M - s, s <= M))
    N_max = -1
    for r in rows:
        if not r.passed:
            break
        N_max = r.N
    limit = None
    if find_limit and rows:
        limit = _bisect_largest(lambda b: hyp(float(ladder[-1]), b) <= M)
    notes = [
        "C_f0 and C~_f0 are measured on the discrete initial datum; they instantiate constants whose existence is proved for weak solutions",
        f"ladder stops at the grid boundary |xi| <= {rho[-1]:.6g}",
    ]
    return InductionReport(state, rows, N_max, limit, notes)


# --- randomized states ------------------------------------------------------


def random_state(rng: np.random.Generator, x: np.ndarray, d: int = 3) -> tuple[np.ndarray, dict]:
    """A random mass-one radial probability density given by its Fourier transform."""
    kind = rng.integers(3)
    if kind == 0:
        m = int(rng.integers(1, 4))
        c = rng.uniform(0.3, 3.0, m)
        w = rng.dirichlet(np.ones(m))
        return (w[None, :] * np.exp(-x[:, None] * c[None, :])).sum(axis=1), {"family": "maxwellian_mix", "c": c.tolist(), "w": w.tolist()}
    if kind == 1:
        e0 = rng.uniform(0.5, 2.0)
        a0 = rng.uniform(-2.0 * e0 / (d + 2), 0.0)
        return (1.0 + a0 * x) * np.exp(-(e0 + a0) * x), {"family": "bkw", "e0": e0, "a0": a0}
    p = rng.uniform(0.5 * d + 1.0, 6.0)
    c = rng.uniform(0.5, 2.0)
    return (1.0 + x / c) ** (-p), {"family": "matern", "p": p, "c": c}


def random_bandlimited(rng: np.random.Generator, x: np.ndarray, rho_range: tuple[float, float]) -> tuple[np.ndarray, dict]:
    """A sum of smooth bumps in ``|eta|`` with random signs inside ``rho_range``."""
    rho = np.sqrt(x)
    m = int(rng.integers(1, 5))
    centers = rng.uniform(*rho_range, m)
    widths = rng.uniform(0.5, 2.0, m)
    amps = rng.normal(size=m)
    vals = (amps[None, :] * np.exp(-0.5 * ((rho[:, None] - centers[None, :]) / widths[None, :]) ** 2)).sum(axis=1)
    return vals, {"centers": centers.tolist(), "widths": widths.tolist(), "amps": amps.tolist()}


# --- suite driver -----------------------------------------------------------


DEFAULT_COUNTS = {
    "subadditivity": 100_000,
    "gtilde": 100_000,
    "psi": 10_000,
    "embedding": 100,
    "coercivity": 100,
    "commutation": 100,
    "trilinear": 100,
}


def _loguniform(rng, lo, hi, n):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


class _LazyInputs:
    """Build witness inputs only for the instances that are reported."""

    def __init__(self, fn, n):
        self.fn, self.n = fn, n

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.fn(int(i))


def _grouped_pairs(rng, n, n_groups):
    """``n`` pairs ``s- <= s+`` split into groups sharing ``(alpha, mu)``."""
    per = n // n_groups
    for _ in range(n_groups):
        mu = float(rng.uniform(0.1, 3.0))
        alpha = math.exp(mu) * float(_loguniform(rng, 1.0, 1e3, 1)[0])
        a = _loguniform(rng, 1e-10, 1e12, per)
        b = _loguniform(rng, 1e-10, 1e12, per)
        a[rng.random(per) < 0.05] = 0.0
        yield alpha, mu, np.minimum(a, b), np.maximum(a, b)


def _sweep_subadditivity(rng, n, tol):
    margins, scales, rows = [], [], []
    for alpha, mu, sm, sp in _grouped_pairs(rng, n, 100):
        margins.append(np.atleast_1d(check_subadditivity(alpha, mu, sm, sp)))
        scales.append(np.maximum(1.0, h_profile(sm + sp, alpha, mu)))
        rows.append((alpha, mu, sm, sp))
    margin = np.concatenate(margins) / np.concatenate(scales)
    per = rows[0][2].size

    def inp(i):
        alpha, mu, sm, sp = rows[i // per]
        return {"alpha": alpha, "mu": mu, "s_minus": sm[i % per], "s_plus": sp[i % per]}

    return sweep_entry("subadditivity", _LazyInputs(inp, margin.size), np.zeros_like(margin), margin, margin, tol, summary={"n": margin.size, "margin": "relative to max(1, h(s- + s+))"})


def _sweep_gtilde(rng, n, tol):
    margins, rows = [], []
    for alpha, mu, sm, sp in _grouped_pairs(rng, n, 100):
        sm = np.where(sm + sp > 0, sm, 0.0)
        sp = np.where(sp > 0, sp, 1e-10)
        p = WeightParams(alpha, float(_loguniform(rng, 1e-3, 2.0, 1)[0]), mu, float(rng.uniform(0.0, 2.0)))
        margins.append(np.atleast_1d(check_Gtilde_diff_bound(p, sm, sp)))
        rows.append((p, sm, sp))
    margin = np.concatenate(margins)
    per = rows[0][1].size

    def inp(i):
        p, sm, sp = rows[i // per]
        return {"alpha": p.alpha, "beta": p.beta, "mu": p.mu, "t": p.t, "s_minus": sm[i % per], "s_plus": sp[i % per]}

    return sweep_entry("gtilde_difference", _LazyInputs(inp, margin.size), np.zeros_like(margin), margin, margin, tol, summary={"n": margin.size, "margin": "relative to G~(s+)"})


def _sweep_psi(rng, n, tol):
    n_groups = 10
    per = n // n_groups
    worst, viol, wit, checked = np.inf, 0, [], 0
    for _ in range(n_groups):
        mu = float(rng.uniform(0.1, 3.0))
        alpha = math.exp(mu) * float(_loguniform(rng, 1.0, 1e3, 1)[0])
        R = float(rng.uniform(1.0, 10.0))
        lam = rng.uniform(0.0, 1.0, per)
        x = _loguniform(rng, 1e-2, 1e12, per)
        rep = check_psi_properties(alpha, mu, R, zip(lam, x), tol=tol)
        checked += rep.scaling_checked
        viol += rep.scaling_violations + (not rep.grows) + (not rep.sublinear_ok)
        worst = min(worst, rep.min_scaling_margin)
        if not rep.passed:
            wit.append({"alpha": alpha, "mu": mu, "R": R, "worst": rep.worst, "grows": rep.grows, "sublinear_ok": rep.sublinear_ok})
    return CheckEntry("psi_scaling", {"n": n, "active": checked}, 0.0, worst, worst, tol, n, viol, wit)


def _sweep_embedding(rng, n, tol, field_snap: IsoSpectralField | None):
    xs = rng.uniform(-5.0, 5.0, n)
    gauss = lambda y: np.exp(-np.sum(y * y, axis=-1))
    res = [check_embedding(gauss, [xv], grad_sup=math.sqrt(2.0) * math.exp(-0.5), sup=1.0, d=1) for xv in xs]
    entries = [sweep_entry("embedding_gaussian_d1", [{"x": v} for v in xs], [r.lhs for r in res], [r.rhs for r in res], [r.margin for r in res], tol, summary={"n": n})]
    if field_snap is not None:
        m = max(1, n // 5)
        rmax = math.sqrt(field_snap.x_grid[-1]) - math.sqrt(3.0) - 1e-9
        pts = rng.normal(size=(m, 3))
        pts *= (rng.uniform(0.0, min(rmax, 8.0), m) / np.linalg.norm(pts, axis=1))[:, None]
        res = [check_embedding(field_snap, p, n_quad=8) for p in pts]
        entries.append(sweep_entry("embedding_snapshot_d3", [{"x": p.tolist()} for p in pts], [r.lhs for r in res], [r.rhs for r in res], [r.margin for r in res], tol, summary={"n": m}))
    return entries


def _sweep_coercivity(rng, n, tol, k, x):
    alphas = [0.0, 1.0, math.exp(k.mu), 1e3]
    rho_max = math.sqrt(x[-1])
    res, inputs = [], []
    for i in range(n):
        gv, ginfo = random_state(rng, x, k.d)
        g = IsoSpectralField(x, gv, k.d)
        consts = coercivity_constants(g, k)
        mode = i % 3
        if mode == 0:
            fv, finfo = random_bandlimited(rng, x, (0.6 * rho_max, 0.75 * rho_max))
        elif mode == 1:
            fv, finfo = random_bandlimited(rng, x, (0.0, 0.75 * rho_max))
        else:
            fv, finfo = random_state(rng, x, k.d)
        f = IsoSpectralField(x, fv, k.d)
        a = alphas[i % len(alphas)]
        r = check_coercivity(g, f, k, a, consts)
        res.append(r)
        inputs.append({"g": ginfo, "f": finfo, "alpha": a, "C_g": consts.C_g, "C_tilde": consts.C_tilde})
    # f = g = Maxwellian
    g = IsoSpectralField(x, np.exp(-x), k.d)
    for a in alphas:
        res.append(check_coercivity(g, g, k, a))
        inputs.append({"g": "maxwellian", "f": "maxwellian", "alpha": a})
    scale = np.array([max(1.0, abs(r.lhs), abs(r.rhs)) for r in res])
    return sweep_entry("coercivity", inputs, [r.lhs for r in res], [r.rhs for r in res], np.array([r.margin for r in res]) / scale, tol, summary={"n": len(res)})


def _weight_sweep_params(rng, k, x):
    mu = k.mu
    alpha = math.exp(mu) * float(_loguniform(rng, 1.0, 1e3, 1)[0])
    bt = float(_loguniform(rng, 1e-2, 2.0, 1)[0])
    lam = float(rng.uniform(2.0, 0.95 * math.sqrt(x[-1])))
    return WeightParams(alpha, bt, mu, 1.0, lam)


def _sweep_commutation(rng, n, tol, k, x, extra_states=()):
    res, inputs = [], []
    for _ in range(n):
        fv, info = random_state(rng, x, k.d)
        p = _weight_sweep_params(rng, k, x)
        res.append(check_commutation_inequality(IsoSpectralField(x, fv, k.d), p, k))
        inputs.append({"state": info, "alpha": p.alpha, "beta_t": p.bt, "Lambda": p.lambda_cut})
    for label, f in extra_states:
        p = _weight_sweep_params(rng, k, x)
        res.append(check_commutation_inequality(f, p, k))
        inputs.append({"state": label, "alpha": p.alpha, "beta_t": p.bt, "Lambda": p.lambda_cut})
    scale = np.array([max(1e-300, r.rhs) for r in res])
    return sweep_entry("commutation", inputs, [r.lhs for r in res], [r.rhs for r in res], np.array([r.margin for r in res]) / scale, tol, summary={"n": len(res), "margin": "relative to the bound"})


def _sweep_trilinear(rng, n, tol, k, x):
    cbd = c_bd_constant(k)
    res, inputs = [], []
    for _ in range(n):
        fv, info = random_state(rng, x, k.d)
        p = _weight_sweep_params(rng, k, x)
        res.append(check_trilinear_bound(IsoSpectralField(x, fv, k.d), p, k, c_bd=cbd))
        inputs.append({"state": info, "alpha": p.alpha, "beta_t": p.bt, "Lambda": p.lambda_cut})
    scale = np.array([max(1e-300, r.rhs) for r in res])
    return sweep_entry("trilinear", inputs, [r.lhs for r in res], [r.rhs for r in res], np.array([r.margin for r in res]) / scale, tol, summary={"n": len(res), "c_bd": cbd, "margin": "relative to the bound"})


def _sweep_laplace(tol):
    from .regularity import check_laplace_integral

    ident_in, ident_err = [], []
    bound_in, bound_m = [], []
    for mu in (0.5, 1.0, 1.5, 2.0, 3.0):
        for tau in (0.5, 1.0, 2.0):
            for n in range(1, 11):
                c = check_laplace_integral(tau, mu, n)
                ident_in.append({"tau": tau, "mu": mu, "n": n})
                ident_err.append(c.identity_rel_err)
                if c.margin is not None:
                    bound_in.append({"tau": tau, "mu": mu, "n": n})
                    bound_m.append(c.margin)
    err = np.array(ident_err)
    e1 = sweep_entry("laplace_identity", ident_in, err, np.full_like(err, 1e-8), 1e-8 - err, 0.0, summary={"n": err.size, "margin": "1e-8 minus relative disagreement"})
    e2 = sweep_entry("laplace_bound", bound_in, np.zeros(len(bound_m)), bound_m, bound_m, tol, summary={"n": len(bound_m), "margin": "relative to the integral"})
    return [e1, e2]


def run_inequality_suite(
    seed: int = 42,
    counts: dict | None = None,
    kernel: AngularKernel | None = None,
    N: int = 2048,
    x_max: float = 400.0,
    tol_report: float = DEFAULT_TOL_REPORT,
    snapshot: IsoSpectralField | None = None,
    extra_states: Sequence[tuple[str, IsoSpectralField]] = (),
) -> VerificationReport:
    """Run every randomized inequality sweep with a fixed seed.

    ``snapshot`` (a simulated state) adds embedding checks on simulated data;
    ``extra_states`` are appended to the commutation sweep.
    """
    counts = {**DEFAULT_COUNTS, **(counts or {})}
    unknown = set(counts) - set(DEFAULT_COUNTS)
    if unknown:
        raise DomainError(f"unknown sweep names {sorted(unknown)}")
    k = kernel or AngularKernel()
    rng = np.random.default_rng(seed)
    x = quadratic_grid(N, x_max)
    get_plan(x, k)
    report = VerificationReport(metadata={"seed": seed, "counts": counts, "kernel": {"family": k.family.value, "d": k.d, "kappa": k.kappa, "mu": k.mu, "nu": k.nu}, "N": N, "x_max": x_max, "tol_report": tol_report})

    def timed(fn, *a):
        t = time.perf_counter()
        out = fn(*a)
        out = out if isinstance(out, list) else [out]
        dt = time.perf_counter() - t
        for e in out:
            e.seconds = dt / len(out)
            report.add(e)

    timed(_sweep_subadditivity, rng, counts["subadditivity"], tol_report)
    timed(_sweep_gtilde, rng, counts["gtilde"], tol_report)
    timed(_sweep_psi, rng, counts["psi"], tol_report)
    timed(_sweep_embedding, rng, counts["embedding"], tol_report, snapshot)
    timed(_sweep_coercivity, rng, counts["coercivity"], tol_report, k, x)
    timed(_sweep_commutation, rng, counts["commutation"], tol_report, k, x, list(extra_states))
    timed(_sweep_trilinear, rng, counts["trilinear"], tol_report, k, x)
    timed(_sweep_laplace, tol_report)
    return report
