"""wavedecay: energy decay laboratory for a velocity-coupled, indirectly damped
1D wave system.

The package has four layers:

  feedback    growth laws g, the convexity function H(x) = sqrt(x) g(sqrt(x)),
              its derivative, the classification ratio Lambda, and the concrete
              damping rho(x, s) = a(x) ghat(s)
  transforms  convex conjugate, L and its inverse, psi0, decay envelopes,
              the optimal weight, and the general-weight K/psi machinery
  sim         dissipation-exact leapfrog solver and energy traces
  odecmp      comparison ODE z' + kappa H(z) = 0 and the lower envelope
  harness     weighted integral inequalities, tail fits, envelope calibration,
              config-driven experiments, CLI
"""

from .feedback import (
    CoefficientField,
    ConvexityReport,
    FeedbackLaw,
    LawError,
    convexity_check,
    eval_H,
    eval_H_prime,
    eval_g,
    lambda_H,
    lambda_limit,
    make_feedback,
    rho_eval,
)
from .transforms import (
    ClassificationError,
    DecayEnvelope,
    TransformError,
    beta_floor,
    conjugate,
    envelope_general,
    envelope_simplified,
    envelope_value,
    eval_L,
    hprime_inv,
    inverse_L,
    optimal_weight,
    psi0_eval,
    psi0_inverse,
    weight_psi_r,
)
from .odecmp import (
    ComparisonError,
    ComparisonSolution,
    K_integral,
    K_inverse,
    hfl_screen,
    lower_envelope,
    solve_comparison,
)
from .sim import (
    EnergyTrace,
    SimConfig,
    SimError,
    WaveState,
    build_coefficients,
    dissipation_rate,
    energy,
    init_state,
    run,
    step,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config_text
from .harness import (
    FitReport,
    HarnessError,
    IntegralCheck,
    calibrate_lower,
    calibrate_upper,
    check_integral_inequality,
    compare_to_envelope,
    default_fit_window,
    fit_tail_exponent,
    lemma_suite,
    run_experiment,
)
from ._kernels import active_backend

__version__ = "0.1.0"

__all__ = [
    "CoefficientField",
    "ConvexityReport",
    "FeedbackLaw",
    "LawError",
    "convexity_check",
    "eval_H",
    "eval_H_prime",
    "eval_g",
    "lambda_H",
    "lambda_limit",
    "make_feedback",
    "rho_eval",
    "ClassificationError",
    "DecayEnvelope",
    "TransformError",
    "beta_floor",
    "conjugate",
    "envelope_general",
    "envelope_simplified",
    "envelope_value",
    "eval_L",
    "hprime_inv",
    "inverse_L",
    "optimal_weight",
    "psi0_eval",
    "psi0_inverse",
    "weight_psi_r",
    "ComparisonError",
    "ComparisonSolution",
    "K_integral",
    "K_inverse",
    "hfl_screen",
    "lower_envelope",
    "solve_comparison",
    "EnergyTrace",
    "SimConfig",
    "SimError",
    "WaveState",
    "build_coefficients",
    "dissipation_rate",
    "energy",
    "init_state",
    "run",
    "step",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config_text",
    "FitReport",
    "HarnessError",
    "IntegralCheck",
    "calibrate_lower",
    "calibrate_upper",
    "check_integral_inequality",
    "compare_to_envelope",
    "default_fit_window",
    "fit_tail_exponent",
    "lemma_suite",
    "run_experiment",
    "active_backend",
    "__version__",
]
