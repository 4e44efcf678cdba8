__version__ = "0.3.0"

from .errors import (
    ConvergenceError,
    DegenerateZeroError,
    DomainError,
    FormatError,
    NoReturnError,
    PoleError,
    SeparatrixSingularity,
    SingularityError,
    StepSizeUnderflow,
    XiFlowError,
)
from .specfun import (
    TruncationConfig,
    cauchy_derivative,
    digamma,
    gamma,
    xi,
    xi_array,
    xi_derivative,
    xi_hadamard_truncated,
    xi_jet,
    xi_log_derivative_via_zeros,
    xi_unreflected,
    zeta,
    zeta_log_derivative,
)
from .zeros import (
    ZeroCatalogue,
    ZeroRecord,
    hardy_xi_real,
    load_catalogue,
    locate_zeros,
    riemann_von_mangoldt,
    save_catalogue,
)
from .dynamics import (
    DormandPrincePI,
    FlowState,
    IntegratorConfig,
    PhasePortrait,
    StepStatistics,
    Trajectory,
    detect_closed_orbit_period,
    integrate_hamiltonian,
    integrate_holomorphic_flow,
    integrate_newton_flow,
    integrate_newton_path,
    integrate_time_reparam,
    integrate_variational,
    phase_portrait_grid,
)
from .formulas import (
    FlowMapDifferential,
    SpectrumTable,
    action,
    delta_p_closed_form,
    flow_map_differential,
    fluctuation_term,
    log_derivative_tail_estimate,
    momentum_closed_form,
    newton_flow_elementary_time,
    newton_time_reparam,
    orbit_period,
    pm_momentum_root,
    pm_polynomial,
    prime_exponential_sum,
    prime_sieve,
    product_identity_residual,
    product_tail_estimate,
    quantized_energies,
)
from .verify import SuiteResult, run_verification
from .logger import logger, set_log_level  # Import set_log_level for user control

__all__ = [
    "ConvergenceError", "DegenerateZeroError", "DomainError", "FormatError", "NoReturnError",
    "PoleError", "SeparatrixSingularity", "SingularityError", "StepSizeUnderflow", "XiFlowError",
    "TruncationConfig", "cauchy_derivative", "digamma", "gamma", "xi", "xi_array", "xi_derivative", "xi_unreflected",
    "xi_hadamard_truncated", "xi_jet", "xi_log_derivative_via_zeros", "zeta", "zeta_log_derivative",
    "ZeroCatalogue", "ZeroRecord", "hardy_xi_real", "load_catalogue", "locate_zeros",
    "riemann_von_mangoldt", "save_catalogue",
    "DormandPrincePI", "FlowState", "IntegratorConfig", "PhasePortrait", "StepStatistics", "Trajectory",
    "detect_closed_orbit_period", "integrate_hamiltonian", "integrate_holomorphic_flow",
    "integrate_newton_flow", "integrate_newton_path", "integrate_time_reparam",
    "integrate_variational", "phase_portrait_grid",
    "FlowMapDifferential", "SpectrumTable", "action", "delta_p_closed_form", "flow_map_differential",
    "fluctuation_term", "log_derivative_tail_estimate", "momentum_closed_form",
    "newton_flow_elementary_time", "newton_time_reparam", "orbit_period", "pm_momentum_root",
    "pm_polynomial", "prime_exponential_sum", "prime_sieve", "product_identity_residual",
    "product_tail_estimate", "quantized_energies",
    "SuiteResult", "run_verification",
    "logger", "set_log_level",
]
