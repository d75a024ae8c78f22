"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""


class IncompatibleGridError(ValueError):
    """Two objects live on different observation grids."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""


class DegenerateBandwidthError(ValueError):
    """The median heuristic returned a zero bandwidth."""


class AcceptanceFailureError(RuntimeError):
    """Accept/reject sampling exhausted its attempt budget."""


class ConfigError(ValueError):
    """An experiment configuration failed validation.

    ``violations`` lists every problem found, not only the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
