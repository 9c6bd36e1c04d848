"""Mixed-criteria model averaging for high quantiles of the GEV distribution.

A library for estimating T-year return levels of block-maxima data by
averaging fixed-shape GEV submodels, with L-moment, likelihood, Bayesian,
and cross-validation weighting schemes, plus the single-fit estimators
(MLE, LME, restricted MLEs, penalized MLE) they are compared against.
"""

from .averaging import (
    METHOD_TABLE,
    AnalysisContext,
    CandidateSet,
    KSelection,
    MaEstimate,
    MaMethodConfig,
    WeightVector,
    ma_return_level,
    ma_standard_error,
    select_K,
)
from .datasets import DataError, Dataset, ingest, load_haenam
from .fitting import (
    FitError,
    FitResult,
    fit_fixed_xi_lme,
    fit_fixed_xi_mle,
    fit_lme,
    fit_mle,
    fit_mle_cd,
    fit_remle,
)
from .gev import (
    GevParams,
    InvalidParamsError,
    cdf,
    log_likelihood,
    logpdf,
    population_l_moments,
    quantile,
    return_level,
    sample,
)
from .intervals import ProfileLikelihood, XiInterval, bootstrap_ci_xi, profile_ci_xi
from .lmom import (
    DegenerateSampleError,
    LMomentCov,
    NotPositiveDefiniteError,
    SampleLMoments,
    generalized_l_distance,
    l_moment_cov,
    sample_l_moments,
)
from .simulate import (
    SimConfig,
    SimReport,
    estimate_return_level,
    parse_report,
    report_table,
    run_simulation,
)
from .surrogate import SurrogateFit, fit_surrogate, surrogate_of_estimate
from .variance import (
    BmaVariance,
    SingularInformationError,
    bma_variance,
    bootstrap_se,
    delta_var,
    delta_var_fixed_xi,
)

__version__ = "0.1.0"

__all__ = [
    "METHOD_TABLE", "AnalysisContext", "CandidateSet", "KSelection",
    "MaEstimate", "MaMethodConfig", "WeightVector", "ma_return_level",
    "ma_standard_error", "select_K",
    "DataError", "Dataset", "ingest", "load_haenam",
    "FitError", "FitResult", "fit_fixed_xi_lme", "fit_fixed_xi_mle",
    "fit_lme", "fit_mle", "fit_mle_cd", "fit_remle",
    "GevParams", "InvalidParamsError", "cdf", "log_likelihood", "logpdf",
    "population_l_moments", "quantile", "return_level", "sample",
    "ProfileLikelihood", "XiInterval", "bootstrap_ci_xi", "profile_ci_xi",
    "DegenerateSampleError", "LMomentCov", "NotPositiveDefiniteError",
    "SampleLMoments", "generalized_l_distance", "l_moment_cov",
    "sample_l_moments",
    "SimConfig", "SimReport", "estimate_return_level", "parse_report",
    "report_table", "run_simulation",
    "SurrogateFit", "fit_surrogate", "surrogate_of_estimate",
    "BmaVariance", "SingularInformationError", "bma_variance", "bootstrap_se",
    "delta_var", "delta_var_fixed_xi",
    "__version__",
]
