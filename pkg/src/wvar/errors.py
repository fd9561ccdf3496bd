"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data is malformed or internally inconsistent (bad file, duplicate
    dates, series too short, misaligned series)."""


class NumericalError(ArithmeticError):
    """A computation cannot produce a trustworthy number (nonfinite integrand
    value, singular linear system, non-PSD covariance)."""


class SingularSystemError(NumericalError):
    """The stationarity system is singular or numerically unsolvable."""

    def __init__(self, message: str, condition_estimate: float):
        super().__init__(message)
        self.condition_estimate = condition_estimate
