"""Ensemble post-processing for nonnegative weather variables.

Predictive distributions (truncated normal, log-normal, generalized
extreme value, and threshold-switched combinations), minimum-CRPS and
maximum-likelihood estimation over rolling training windows, proper
scores with closed forms where they exist, and a verification suite
built around rank and PIT histograms.
"""

from .distributions import GEV, LogNormal, MeanVariance, TruncatedNormal
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateScaleWarning,
    EstimationError,
    InsufficientDataError,
    InvalidInputError,
    InvalidParameterError,
    NumericFailureError,
    TrainingFallbackWarning,
    UndefinedMomentError,
    UndefinedSkillError,
    WindemosError,
)
from .estimation import (
    CalibrationResult,
    FitResult,
    GridSearchResult,
    ModelSpec,
    TrainingWindow,
    climatology_forecast,
    days_with_data,
    default_gev_params,
    default_ln_params,
    default_tn_params,
    fit_gev_ml,
    fit_min_crps,
    fit_switch,
    grid_search,
    rolling_calibrate,
    rolling_climatology,
    rolling_raw,
)
from .models import (
    EnsembleForecast,
    EnsembleStats,
    GevParams,
    GroupSpec,
    LnParams,
    RegimeSwitchConfig,
    TnParams,
    ensemble_stats,
    gev_link,
    ln_link,
    predict_gev,
    predict_ln,
    predict_switch,
    predict_tn,
    tn_link,
)
from .scoring import (
    Empirical,
    ScoreSummary,
    aggregate_log_scores,
    crps_empirical,
    crps_ln,
    crps_numeric,
    crps_quad_batch,
    crps_tn,
    crps_values,
    log_score,
    mae_median,
    rmse_mean,
    twcrps,
    twcrps_values,
    twcrpss,
)
from .synthetic import ScenarioConfig, generate
from .verification import (
    RankHistogram,
    VerificationReport,
    build_report,
    central_interval,
    ensemble_coverage,
    ks_uniform_test,
    nominal_coverage,
    pit,
    pit_histogram,
    rank_of_obs,
    ranks_of_obs,
    reliability_index,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationResult",
    "ConfigError",
    "DataFormatError",
    "DegenerateScaleWarning",
    "Empirical",
    "EnsembleForecast",
    "EnsembleStats",
    "EstimationError",
    "FitResult",
    "GEV",
    "GevParams",
    "GridSearchResult",
    "GroupSpec",
    "InsufficientDataError",
    "InvalidInputError",
    "InvalidParameterError",
    "LnParams",
    "LogNormal",
    "MeanVariance",
    "ModelSpec",
    "NumericFailureError",
    "RankHistogram",
    "RegimeSwitchConfig",
    "ScenarioConfig",
    "ScoreSummary",
    "TnParams",
    "TrainingFallbackWarning",
    "TrainingWindow",
    "TruncatedNormal",
    "UndefinedMomentError",
    "UndefinedSkillError",
    "VerificationReport",
    "WindemosError",
    "aggregate_log_scores",
    "build_report",
    "central_interval",
    "climatology_forecast",
    "crps_empirical",
    "crps_ln",
    "crps_numeric",
    "crps_quad_batch",
    "crps_tn",
    "crps_values",
    "days_with_data",
    "default_gev_params",
    "default_ln_params",
    "default_tn_params",
    "ensemble_coverage",
    "ensemble_stats",
    "fit_gev_ml",
    "fit_min_crps",
    "fit_switch",
    "generate",
    "gev_link",
    "grid_search",
    "ks_uniform_test",
    "ln_link",
    "log_score",
    "mae_median",
    "nominal_coverage",
    "pit",
    "pit_histogram",
    "predict_gev",
    "predict_ln",
    "predict_switch",
    "predict_tn",
    "rank_of_obs",
    "ranks_of_obs",
    "reliability_index",
    "rmse_mean",
    "rolling_calibrate",
    "rolling_climatology",
    "rolling_raw",
    "tn_link",
    "twcrps",
    "twcrps_values",
    "twcrpss",
]
