"""Exception types shared across the package."""


class PathAggError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(PathAggError):
    """A configuration object or constructor argument is not usable."""


class InvalidInputError(PathAggError):
    """Runtime data handed to an operation violates its preconditions."""


class AlphabetError(InvalidInputError):
    """A sequence contains a character outside the model alphabet."""


class DecodeFailureError(PathAggError):
    """No positive-probability state path exists for the input sequence."""

class LatticeBudgetError(PathAggError):
    """Exact visit-vector inference was requested beyond the lattice budget."""


class CapacityError(InvalidConfigError):
    """A structural edit would exceed the configured maximum."""


class GenerationError(PathAggError):
    """Synthetic sequence generation could not satisfy its constraints."""


class ParseError(PathAggError):
    """A data file is malformed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelFormatError(PathAggError):
    """A model file is unreadable, truncated, or of an unsupported version."""
