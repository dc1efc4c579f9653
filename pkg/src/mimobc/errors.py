"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible matrix/vector dimensions."""


class NotPsdError(ValueError):
    """A matrix required to be positive semidefinite is not."""


class SingularMatrixError(ValueError):
    """A matrix required to be positive definite is singular or indefinite."""


class LoewnerOrderError(ValueError):
    """A required Loewner ordering between two matrices does not hold."""


class InadmissibleSourceError(ValueError):
    """Input distribution violates the covariance cap of the channel."""


class InputFormatError(ValueError):
    """Malformed JSON input or invalid field values."""


class NumericalError(RuntimeError):
    """A numerical routine diverged or produced non-finite values."""
