"""Pseudospectral simulation and lattice-estimate checks for the periodic good Boussinesq equation."""

__version__ = "0.1.0"

from .spectral_core import (  # noqa: E402
    DomainError,
    ModelParams,
    SpectralField,
    TruncationMismatch,
)
from .dynamics import NumericalInstability  # noqa: E402

__all__ = [
    "__version__",
    "DomainError",
    "ModelParams",
    "NumericalInstability",
    "SpectralField",
    "TruncationMismatch",
]
