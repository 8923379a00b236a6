"""Exception types raised across the package."""


class CqcError(Exception):
    """Base class for package errors."""


class DimensionError(CqcError, ValueError):
    """Tensor extents or axis groups do not fit together."""


class NumericalError(CqcError, ArithmeticError):
    """A numerical routine failed (non-finite values, rank deficiency)."""


class ResourceError(CqcError, MemoryError):
    """A size limit was exceeded (bond dimension, statevector size)."""


class ConvergenceError(CqcError, RuntimeError):
    """An iterative routine hit its iteration limit.

    The best value found so far is kept on ``best``.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class PostSelectionError(CqcError, ValueError):
    """Post-selection on the ancilla has zero probability."""


class SchemaError(CqcError, ValueError):
    """A serialized file or config does not match the expected schema."""
