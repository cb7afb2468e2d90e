"""Exception types raised across the package."""


class QutritError(Exception):
    """Base class for all errors raised by this package."""


class ZeroState(QutritError, ValueError):
    """All three amplitudes vanish, so the state cannot be normalized."""


class NonFinite(QutritError, ValueError):
    """An amplitude is NaN or infinite."""


class DegenerateConcurrence(QutritError, ValueError):
    """The x parameter is 0/0 for a maximally entangled state."""


class InvalidTrials(QutritError, ValueError):
    pass


class MissingSetting(QutritError, ValueError):
    """The records passed to the estimator lack a required beam-splitter angle."""


class ParseError(QutritError, ValueError):
    pass


class ToleranceViolation(QutritError):
    def __init__(self, name, value, tol):
        super().__init__(f"{name} = {value:.3e} exceeds tolerance {tol:.1e}")
        self.name = name
        self.value = value
        self.tol = tol
