"""Simulation and verification toolkit for stochastic codeword-transfer experiments.

Amplitude encoding of probabilities, Fisher-information and Cramér-Rao checks,
Monte Carlo transfer experiments, and entropic Bell tests on double transfers.
"""

__version__ = "0.1.0"

from .core import (
    CodewordSet,
    Encoding,
    ProbabilityVector,
    StateVector,
    amplitude_encode,
    encoding_ode_residual,
    measure_probabilities,
    rotate,
)
from .errors import (
    CodewordError,
    DimensionError,
    DomainError,
    EndpointSingularityError,
    NormalizationError,
)

__all__ = [
    "CodewordError",
    "CodewordSet",
    "DimensionError",
    "DomainError",
    "Encoding",
    "EndpointSingularityError",
    "NormalizationError",
    "ProbabilityVector",
    "StateVector",
    "amplitude_encode",
    "encoding_ode_residual",
    "measure_probabilities",
    "rotate",
]
