"""Numerical lab for an integrable two-component Camassa-Holm type system.

Modules: spectral (grid and Fourier operators), exact (peakon and kink
solutions), evolve (pseudospectral RK4 solver), characteristics,
diagnostics (conservation laws, blow-up monitors, eta predictor), besov
(Littlewood-Paley norms), weakcheck (distributional residuals) and cli.
"""

from .errors import (
    ConfigurationError,
    DomainViolationError,
    HypothesisNotMetError,
    InvalidParameterError,
    NumericFailure,
    OutOfBandError,
    TwoCompError,
    UsageError,
)

__version__ = "0.1.0"

__all__ = [
    "TwoCompError",
    "ConfigurationError",
    "UsageError",
    "InvalidParameterError",
    "DomainViolationError",
    "HypothesisNotMetError",
    "NumericFailure",
    "OutOfBandError",
]
