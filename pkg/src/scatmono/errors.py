"""Exception types raised by the numerical routines."""


class ScatmonoError(Exception):
    """Base class for all library errors."""


class ConfigError(ScatmonoError, ValueError):
    """Invalid input data (bad polynomial terms, malformed config, ...)."""


class NumericalError(ScatmonoError):
    """A computation could not be completed to the requested accuracy.

    ``index`` identifies the offending member of a batched computation
    when that is known, otherwise it is ``None``.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IntegrationError(NumericalError):
    pass


class StepLimitError(IntegrationError):
    """The integrator used up ``max_steps`` before reaching the end time."""


class BlowUpError(IntegrationError):
    """The state became non-finite."""


class RangeError(NumericalError):
    """A closed-form flow was asked for a time whose exponential overflows."""


class DomainViolation(NumericalError):
    """A point left the region where the normalizing field is certified."""

    def __init__(self, message, point=None, index=None):
        super().__init__(message, index=index)
        self.point = point


class PoleError(NumericalError):
    """The connection form was evaluated too close to its pole ``z1 = 0``."""


class SectionNotReached(NumericalError):
    """A trajectory never crossed the requested cross section."""


class UnwrapAmbiguity(NumericalError):
    """Consecutive phase samples are too far apart to unwrap reliably."""
