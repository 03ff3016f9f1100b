"""Exception types raised by quadbeam."""


class DomainError(ValueError):
    """An argument is outside the documented operating range."""


class SingularInputError(ValueError):
    """The requested quantity is singular at the given input."""


class SingularPhaseError(SingularInputError):
    """The phase gradient is undefined (vortex core); offset the point from the axis."""


class ConfigError(ValueError):
    """Invalid run configuration. ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
