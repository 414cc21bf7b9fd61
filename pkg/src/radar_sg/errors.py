"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """An input is outside the documented domain of an operation."""


class UnsupportedParameters(ValueError):
    """The parameter regime has no closed form (or no guarantee) here."""


class ConvergenceError(ArithmeticError):
    """A truncated series or iterative method failed to reach its tolerance."""
