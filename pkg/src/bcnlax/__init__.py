"""BC_n Calogero-Inozemtsev model with R-matrix valued Lax pairs and its frozen spin chain."""

from .elliptic import CouplingSet, EllipticContext
from .errors import (BcnLaxError, ConfigError, DomainError, NotAnEquilibriumError, SamplerError,
                     SeriesTruncationError, SingularJacobianError, StepRejectionError)
from .lax_scalar import ModelParams, PhaseState
from .reports import CheckRow, Report

__version__ = "0.1.0"

__all__ = [
    "BcnLaxError", "CheckRow", "ConfigError", "CouplingSet", "DomainError", "EllipticContext", "ModelParams",
    "NotAnEquilibriumError", "PhaseState", "Report", "SamplerError", "SeriesTruncationError",
    "SingularJacobianError", "StepRejectionError", "__version__",
]
