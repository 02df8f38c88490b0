"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` holds the dotted path when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = ""
        if field:
            prefix += f"{field}: "
        if line is not None:
            prefix = f"line {line}: " + prefix
        super().__init__(prefix + message)


class NumericalError(RuntimeError):
    """A quadrature or root-finding step failed to meet its tolerance."""


class SpotOverlapError(ValueError):
    """Satellite spots would overlap (spot availability above one)."""
