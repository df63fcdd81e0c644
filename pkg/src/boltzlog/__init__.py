"""Fourier-side homogeneous Boltzmann simulator for Maxwellian molecules with
log-singular (Debye-Yukawa type) angular kernels, plus an inequality and
induction verification harness."""

__version__ = "0.1.0"

from .collision import (
    CollisionPlan,
    Grid2DField,
    IsoSpectralField,
    bobylev_Q_2d,
    bobylev_Q_iso,
    bobylev_Q_pair,
    coercivity_functional,
    commutation_error_lhs,
    commutation_error_rhs,
    quadratic_grid,
    trilinear_form,
)
from .errors import (
    BlowUpError,
    ConfigError,
    ConvergenceError,
    DegenerateStateError,
    DomainError,
    ResolutionError,
    ResourceGuardError,
    StabilityError,
)
from .kernel import AngularKernel, KernelFamily, eval_reduced_kernel, kernel_moment, momentum_transfer, mu_from_debye
from .regularity import check_amu_forward, check_laplace_integral, derivative_norms, fit_beta
from .solver import ICFamily, InitialCondition, Integrator, SimConfig, Trajectory, integrate, moment_ode_oracle, moments, reconstruct_physical_radial
from .verify import (
    InductionState,
    VerificationReport,
    beta0,
    c_bd_constant,
    check_coercivity,
    check_commutation_inequality,
    check_embedding,
    check_trilinear_bound,
    estimate_Cg_tilde,
    run_induction,
    run_inequality_suite,
)
from .weights import (
    G_weight,
    WeightParams,
    bracket_alpha,
    check_Gtilde_diff_bound,
    check_psi_properties,
    check_subadditivity,
    h_profile,
)
