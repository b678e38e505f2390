"""Exception types shared across the package."""


class InvalidInstance(ValueError):
    """Model parameters violate a structural requirement."""


class InstanceMismatch(ValueError):
    """Two grid functions do not live on the same grid."""


class NotInX0(ValueError):
    """The zero function was passed where a nontrivial state is required."""


class SamplerFailure(RuntimeError):
    """Every trial function handed to the well-depth estimator was degenerate."""


class UnsupportedRegime(ValueError):
    """The requested check is undefined for these parameters (p = 2 degenerates)."""


class HypothesisNotMet(ValueError):
    """The trace does not satisfy the hypothesis of the requested check."""


class StepCollapse(RuntimeError):
    """Time step underflowed without evidence of finite-time blow-up."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class NumericalFailure(RuntimeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, message: str, row_index: int):
        super().__init__(message)
        self.row_index = row_index


class ConfigError(ValueError):
    """Unusable configuration file or option combination."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
