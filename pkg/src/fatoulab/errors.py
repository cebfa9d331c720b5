"""Exception types shared across the package."""


class FatouLabError(Exception):
    """Base class for all package errors."""


class GroupError(FatouLabError):
    """Invalid group operation: mismatched groups, bad dilation factor, bad coordinates."""


class MeasureError(FatouLabError):
    """Measure construction or operation failed (negative density, infinite mass, ...)."""


class NumericsError(FatouLabError):
    """A quadrature or estimator failed to converge.

    Carries an optional ``location`` (coordinates or node index) and ``estimate``
    (the achieved error estimate) so callers can report actionable diagnostics.
    """

    def __init__(self, message, location=None, estimate=None):
        super().__init__(message)
        self.location = location
        self.estimate = estimate


class CertificationError(FatouLabError):
    """A certified constant could not be produced (non-convergent series, bad grid)."""


class ConfigError(FatouLabError):
    """Scenario or suite configuration is invalid (usage error, exit code 2)."""
