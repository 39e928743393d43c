"""Stackelberg equilibrium of a blockchain-service market with cyber-insurance."""

from .demand import (
    ContractionCheck,
    DemandProfile,
    ExternalityGraph,
    Segment,
    brute_force_lcp,
    check_contraction,
    closed_form_demand,
    lcp_demand,
    spectral_radius,
    user_utility,
)
from .equilibrium import (
    EquilibriumReport,
    SolveOptions,
    best_response_insurer,
    best_response_provider,
    solve_stackelberg,
)
from .errors import (
    ChainsureError,
    ConfigurationError,
    ContractionViolation,
    ConvergenceError,
    UniquenessViolation,
)
from .harness import (
    ExperimentConfig,
    SweepRow,
    emit_csv,
    generate_instance,
    default_config,
    read_csv,
    run_sweep,
    solve_point,
    sweep_points,
)
from .market import (
    ExistenceCheck,
    InsurerStrategy,
    MarketParams,
    ProviderStrategy,
    UniquenessCheck,
    check_existence,
    check_uniqueness,
    insurer_curvature,
    insurer_gradient,
    insurer_profit,
    leader_jacobian,
    provider_gradient,
    provider_hessian,
    provider_profit,
)
from .risk import (
    RiskModel,
    attack_probability,
    distorted_log_moments,
    expected_loss,
    premium,
    reputation_penalty,
    risk_cdf,
    survival_grid,
)
from .specfun import QuadratureSpec, Scheme, integrate, log_gamma, reg_inc_beta

__version__ = "0.1.0"

__all__ = [
    "ChainsureError",
    "ConfigurationError",
    "ContractionCheck",
    "ContractionViolation",
    "ConvergenceError",
    "DemandProfile",
    "EquilibriumReport",
    "ExistenceCheck",
    "ExperimentConfig",
    "ExternalityGraph",
    "InsurerStrategy",
    "MarketParams",
    "ProviderStrategy",
    "QuadratureSpec",
    "RiskModel",
    "Scheme",
    "Segment",
    "SolveOptions",
    "SweepRow",
    "UniquenessCheck",
    "UniquenessViolation",
    "attack_probability",
    "best_response_insurer",
    "best_response_provider",
    "brute_force_lcp",
    "check_contraction",
    "check_existence",
    "check_uniqueness",
    "closed_form_demand",
    "distorted_log_moments",
    "emit_csv",
    "expected_loss",
    "generate_instance",
    "insurer_curvature",
    "insurer_gradient",
    "insurer_profit",
    "integrate",
    "lcp_demand",
    "leader_jacobian",
    "log_gamma",
    "default_config",
    "premium",
    "provider_gradient",
    "provider_hessian",
    "provider_profit",
    "read_csv",
    "reg_inc_beta",
    "reputation_penalty",
    "risk_cdf",
    "run_sweep",
    "solve_point",
    "solve_stackelberg",
    "spectral_radius",
    "survival_grid",
    "sweep_points",
    "user_utility",
]
