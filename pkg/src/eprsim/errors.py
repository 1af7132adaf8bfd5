class ConfigError(ValueError):
    """Invalid experiment configuration."""


class EmptyTallyError(ValueError):
    """No double detections to estimate a correlation from."""


class DegenerateFitError(ValueError):
    """Curve carries no shape information (constant)."""


class ConfigParseError(ConfigError):
    """Malformed config file, flag value, or unknown key."""
