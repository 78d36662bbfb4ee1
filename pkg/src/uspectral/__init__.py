"""Lag-window spectral density estimation for rank-based dependence measures."""

from .dependence import (
    DependenceSequence,
    MeasureKind,
    TimeSeries,
    autocovariance_lag,
    dependence_sequence,
    kendall_tau_lag,
    lag_pairs,
    spearman_rho_lag,
)
from .estimator import LagWindowSpectralEstimator
from .hoeffding import (
    DecayTable,
    DecompositionReport,
    HoeffdingModel,
    bvn_cdf,
    decompose,
    degenerate_decay_experiment,
    gaussian_copula,
    h1,
    lag_model,
)
from .simlab import (
    BiasTable,
    McReport,
    SimulationModel,
    bias_experiment,
    clt_experiment,
    marginal_transform,
    simulate,
    true_spectrum,
    true_xi,
    windowed_mean_spectrum,
)
from .spectral import (
    Bandwidth,
    GeneralizedDerivative,
    SpectralEstimate,
    default_grid,
    estimate_spectrum,
    generalized_derivative,
    infer,
    select_bandwidth,
    spectrum_from_sequence,
)
from .validation import (
    InputFormatError,
    InternalInvariantError,
    PreconditionError,
    TieValueWarning,
)
from .windows import LagWindow, builtin_window, get_window, weights

__version__ = "0.1.0"

__all__ = [
    "Bandwidth",
    "BiasTable",
    "DecayTable",
    "DecompositionReport",
    "DependenceSequence",
    "GeneralizedDerivative",
    "HoeffdingModel",
    "InputFormatError",
    "InternalInvariantError",
    "LagWindow",
    "LagWindowSpectralEstimator",
    "McReport",
    "MeasureKind",
    "PreconditionError",
    "SimulationModel",
    "SpectralEstimate",
    "TieValueWarning",
    "TimeSeries",
    "autocovariance_lag",
    "bias_experiment",
    "builtin_window",
    "bvn_cdf",
    "clt_experiment",
    "decompose",
    "default_grid",
    "degenerate_decay_experiment",
    "dependence_sequence",
    "estimate_spectrum",
    "gaussian_copula",
    "generalized_derivative",
    "get_window",
    "h1",
    "infer",
    "kendall_tau_lag",
    "lag_model",
    "lag_pairs",
    "marginal_transform",
    "select_bandwidth",
    "simulate",
    "spearman_rho_lag",
    "spectrum_from_sequence",
    "true_spectrum",
    "true_xi",
    "weights",
    "windowed_mean_spectrum",
    "__version__",
]
