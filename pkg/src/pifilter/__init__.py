"""Phase-insensitive quantum filters for coupled-cavity interferometers.

Frequency-domain model of a sensing cavity coupled to a filter cavity with
an active phase-insensitive element, the homodyne SNR enhancement it
provides, closed-loop stability checks, and a constrained search for
stable rational filters.
"""

from .errors import (
    ConfigError,
    IllPosedFitError,
    IndeterminateVerdictError,
    InfeasibleSeedError,
    QuadratureError,
    SingularEvaluationError,
)
from .gains import gain, optimal_gain, pt_gain, pt_to_zpk, zpk_eval
from .model import (
    REFERENCE,
    ZPK,
    Detuned,
    DerivedRates,
    InterferometerConfig,
    Optimal,
    PTSymmetric,
    Rational,
    Unity,
    derive_rates,
    load_config,
    pt_condition_coupling,
    reference_pt,
)
from .optimize import CostOptions, FilterOptimizer, cost, optimize_filter
from .ratfit import VectorFitter, seed_from_gopt, vector_fit
from .response import chi_sq, integral_enhancement
from .stability import nyquist
from .transfer import DelayMode, transfer_set

__all__ = [
    "REFERENCE", "ZPK", "ConfigError", "CostOptions", "DelayMode", "DerivedRates", "Detuned",
    "FilterOptimizer", "IllPosedFitError", "IndeterminateVerdictError", "InfeasibleSeedError",
    "InterferometerConfig", "Optimal", "PTSymmetric", "QuadratureError", "Rational",
    "SingularEvaluationError", "Unity", "VectorFitter", "chi_sq", "cost", "derive_rates", "gain",
    "integral_enhancement", "load_config", "nyquist", "optimal_gain", "optimize_filter",
    "pt_condition_coupling", "pt_gain", "pt_to_zpk", "reference_pt", "seed_from_gopt",
    "transfer_set", "vector_fit", "zpk_eval",
]
