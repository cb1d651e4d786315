"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A caller-supplied argument violates a documented precondition."""


class NumericError(ArithmeticError):
    """A computation produced non-finite or unusable intermediate values."""


class ConstructionError(RuntimeError):
    """A network builder could not meet its certificate or a structural floor."""
