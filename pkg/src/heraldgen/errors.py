"""Exception hierarchy shared by every module."""


class HeraldgenError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(HeraldgenError, ValueError):
    """Input fails a structural or range check."""


class DimensionError(ValidationError):
    """Cutoffs or shapes do not match."""


class DomainError(ValidationError):
    """A scalar argument lies outside the function's domain."""


class ContractError(HeraldgenError, ValueError):
    """A precondition on a state (e.g. normalization) does not hold."""


class ParameterError(ValidationError):
    """Physical parameters produce an unusable construction."""


class TruncationError(HeraldgenError):
    """Too much probability mass was lost to the Fock cutoff."""


class DecompositionError(HeraldgenError):
    """A matrix factorization or inverse is not available."""


class ResourceError(HeraldgenError):
    """A request would exceed a hard resource guard."""


class OracleMismatchError(HeraldgenError):
    """Two independent computations of the same quantity disagree."""

    def __init__(self, message, expected=None, actual=None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class ConvergenceError(HeraldgenError):
    """No optimization restart produced a usable result."""
