"""Numerics for macroscopic quantum superpositions of continuous-variable states."""

from .errors import (
    InvalidArgumentError,
    MacrocatError,
    OutOfRangeError,
    PreconditionError,
    TruncationError,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidArgumentError",
    "MacrocatError",
    "OutOfRangeError",
    "PreconditionError",
    "TruncationError",
    "__version__",
]
