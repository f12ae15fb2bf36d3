"""Exception types shared across the package."""


class ProfileError(ValueError):
    """Invalid profile samples or coordinate data."""


class QuadratureError(ArithmeticError):
    """A numerical integration failed to reach its tolerance."""


class ConfigError(ValueError):
    """A run configuration is missing keys or has inconsistent values."""
