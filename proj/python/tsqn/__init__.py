from ._tsqn import (
    DomainSet,
    EstimatorConfig,
    NoiseModel,
    RunTrace,
    SaturationSpec,
    TsqnError,
    TsqnEstimator,
    asymptotic_ci,
    empirical_quantile,
    experiment_curves,
    fit,
    g_bounds,
    g_deriv,
    g_mean,
    hoeffding_upsilon,
    lyapunov_bound,
    mc_errors,
    mc_interval,
    q_project,
    reference_domain,
    run_cli,
    sigma_var,
    simulate_reference,
)

__all__ = [
    "DomainSet",
    "EstimatorConfig",
    "NoiseModel",
    "RunTrace",
    "SaturationSpec",
    "TsqnError",
    "TsqnEstimator",
    "asymptotic_ci",
    "empirical_quantile",
    "experiment_curves",
    "fit",
    "g_bounds",
    "g_deriv",
    "g_mean",
    "hoeffding_upsilon",
    "lyapunov_bound",
    "mc_errors",
    "mc_interval",
    "q_project",
    "reference_domain",
    "run_cli",
    "sigma_var",
    "simulate_reference",
]
