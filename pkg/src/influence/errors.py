"""Exception hierarchy shared across the package."""


class InfluenceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(InfluenceError, ValueError):
    """An argument is outside the operation's domain."""


class UnknownEventError(DomainError, LookupError):
    """An event id is not part of the poset (or chain) being queried."""


class CycleError(DomainError):
    """An edge insertion would create a directed cycle."""


class CoordinationError(DomainError):
    """Two observer chains fail the coordination check."""


class ProjectionIncompleteError(InfluenceError):
    """A required projection onto an observer chain does not exist."""


class DegenerateWalkError(DomainError):
    """A walk is lightlike (all steps one-sided); relativistic mass diverges."""


class SingularTimeError(DomainError):
    """Proper-time integration would start at or cross tau = 0."""


class ResolutionError(DomainError):
    """Requested influence rate exceeds what one receipt per emission can realize."""


class ConfigError(InfluenceError, ValueError):
    """A scenario or CLI configuration is invalid; message names the field."""
