"""Exception types shared across the package."""


class MacrocatError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(MacrocatError, ValueError):
    """An argument lies outside the domain of the operation."""


class OutOfRangeError(MacrocatError, ValueError):
    """A requested target value is not attainable for the given parameters."""


class PreconditionError(MacrocatError, ValueError):
    """The input violates a documented precondition (e.g. a mixed state was
    passed where a pure one is required)."""


class TruncationError(MacrocatError, ArithmeticError):
    """The truncated Fock basis discards more norm than the caller allows."""
