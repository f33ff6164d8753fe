"""Simulation of optical time-domain ionizing matter-wave interferometers."""
from ._backend import BACKEND
from .errors import (
    ConfigError,
    DegenerateSignalError,
    DomainError,
    OtimaError,
    PrecisionError,
    SingularityError,
    VerificationError,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DegenerateSignalError",
    "DomainError",
    "OtimaError",
    "PrecisionError",
    "SingularityError",
    "VerificationError",
]
