"""Exception and warning classes shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain of the requested quantity."""


class RegimeError(ValueError):
    """The requested approximation is not valid at these parameters."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its certified tolerance.

    ``bound`` carries the best error bound that was achieved, if any.
    """

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class RegimeWarning(UserWarning):
    """Parameters lie outside the window where an asymptotic bound is meaningful."""
