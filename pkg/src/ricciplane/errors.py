"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class PositivityError(ValueError):
    """A conformal factor was non-positive where a Riemannian metric is required."""


class UnderResolved(ValueError):
    pass


class NewtonFailure(RuntimeError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DomainError(ValueError):
    pass


class BallTruncated(ValueError):
    pass


class InsufficientStates(ValueError):
    pass


class TensorInputError(ValueError):
    pass
