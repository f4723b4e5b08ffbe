"""Exception hierarchy shared by every pipeline.

Each class carries the CLI exit status it maps to, so the entry point can
translate failures without a lookup table.
"""


class GevreyError(Exception):
    exit_code: int = 3


class ValidationError(GevreyError):
    """Input failed schema or precondition validation."""

    exit_code = 2


class BasePointMismatch(ValidationError):
    """Two jets were combined with different splits, base points or rings."""


class NonInvertible(GevreyError):
    """Ring element (or jet constant term) has no inverse: ellipticity fails."""


class OnSpectrum(GevreyError):
    """A contour node or spectral-gap endpoint is too close to an eigenvalue."""


class QuadratureNotConverged(GevreyError):
    pass


class InequalityViolated(GevreyError):
    """A proven inequality failed numerically. Always an implementation bug."""


class DegenerateProbe(GevreyError):
    pass


class InsufficientData(GevreyError):
    pass


class MissingGrowthData(GevreyError):
    pass


class IncompatibleCertificates(GevreyError):
    pass


class OrderExhausted(GevreyError):
    """A derivative or h-order exceeds the valid order carried by the data."""

    exit_code = 4


class TruncationExceedsData(OrderExhausted):
    pass
