"""Simulation toolkit for log-correlated Gaussian fields, multiplicative
chaos measures, and reconstruction of the field from its chaos."""

__version__ = "0.1.0"

from .errors import QualityError
from .grids import GridSpec, ScaleLadder
from .seedcov import (
    SeedCovariance,
    cross_cutoff_covariance,
    cutoff_covariance,
    g_remainder,
    increment_kernel,
    limit_increment_covariance,
    make_seed_covariance,
    window_increment_covariance,
)
from .fields import (
    FieldEnsemble,
    HolderFieldSpec,
    KLFieldSpec,
    extract_Y,
    extract_Z,
    replica_rng,
    sample_cutoff_ensemble,
    sample_gff_kl,
    sample_holder_field,
)
from .chaos import (
    ChaosMeasure,
    NormalizerTable,
    chaos_option1,
    chaos_option2,
    critical_gamma,
    gmc_critical,
    gmc_subcritical,
    integrate,
    smooth_at,
    smooth_field,
)
from .reconstruct import (
    ConvergenceStudy,
    CounterTerm,
    Mollifier,
    ReconstructionResult,
    TestFunction,
    build_mollifier,
    build_test_function,
    convergence_study,
    estimate_counter_term,
    gaussian_shift_counter,
    log_smoothed_field,
    reconstruct_pairing,
)
from .scalelab import (
    ThickPointMeasure,
    TransferMeasure,
    ZetaModel,
    circle_counterexample_gn,
    factor_moment_exact,
    gamma_transfer,
    integrate_masses,
    relative_l2,
    small_lambda_log_moment,
    thick_point_measure,
    zeta_field_sample,
    zeta_gn_ratio,
)
from .statlab import (
    SlopeFit,
    StatReport,
    empirical_cov,
    gaussianity_check,
    heavy_tail_flag,
    l2_error,
    max_share,
    mc_mean_ci,
    slope_fit,
)

__all__ = [
    "QualityError",
    "GridSpec",
    "ScaleLadder",
    "SeedCovariance",
    "make_seed_covariance",
    "cutoff_covariance",
    "cross_cutoff_covariance",
    "increment_kernel",
    "g_remainder",
    "limit_increment_covariance",
    "window_increment_covariance",
    "FieldEnsemble",
    "sample_cutoff_ensemble",
    "replica_rng",
    "extract_Y",
    "extract_Z",
    "KLFieldSpec",
    "sample_gff_kl",
    "HolderFieldSpec",
    "sample_holder_field",
    "ChaosMeasure",
    "NormalizerTable",
    "critical_gamma",
    "gmc_subcritical",
    "gmc_critical",
    "chaos_option1",
    "chaos_option2",
    "integrate",
    "smooth_at",
    "smooth_field",
    "Mollifier",
    "build_mollifier",
    "TestFunction",
    "build_test_function",
    "log_smoothed_field",
    "CounterTerm",
    "estimate_counter_term",
    "gaussian_shift_counter",
    "reconstruct_pairing",
    "ReconstructionResult",
    "ConvergenceStudy",
    "convergence_study",
    "ThickPointMeasure",
    "thick_point_measure",
    "integrate_masses",
    "TransferMeasure",
    "gamma_transfer",
    "relative_l2",
    "ZetaModel",
    "zeta_field_sample",
    "factor_moment_exact",
    "small_lambda_log_moment",
    "zeta_gn_ratio",
    "circle_counterexample_gn",
    "StatReport",
    "SlopeFit",
    "mc_mean_ci",
    "empirical_cov",
    "l2_error",
    "slope_fit",
    "gaussianity_check",
    "max_share",
    "heavy_tail_flag",
]
