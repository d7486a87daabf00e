"""Exception types shared across the package."""


class StrobomapError(Exception):
    """Base class for all package errors."""


class ConfigError(StrobomapError):
    """Invalid configuration file, override or model setup."""


class NoEquilibrium(StrobomapError):
    """The unforced field has no sign change on (0, theta)."""


class IntegrationFailure(StrobomapError):
    """The ODE integrator or a flow table could not meet its tolerance."""


class NoSpikeRegime(StrobomapError):
    """The drive is too weak for the trajectory from the reset value to reach theta."""


class BoundaryAbsent(StrobomapError):
    """The requested map discontinuity does not lie in [0, theta)."""


class NoRoot(StrobomapError):
    """An implicit bifurcation condition has no root in the search range."""


class OrderingViolation(StrobomapError):
    """The border-collision curve sequence is not strictly increasing."""


class MonotonicityViolation(StrobomapError):
    """The rotation/firing number decreased along a scan."""


class AddingViolation(StrobomapError):
    """The concatenated word predicted between two plateaus was not found."""


class DegenerateBoundary(StrobomapError):
    """An orbit point sits within numerical noise of the map discontinuity."""
