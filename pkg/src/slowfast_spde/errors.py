"""Exception types shared across the package."""


class SlowFastError(Exception):
    """Base class for package-specific failures."""


class ConfigError(SlowFastError):
    """Invalid or inconsistent configuration input."""


class IntegrationError(SlowFastError):
    """A time integrator produced an invalid state (NaN/Inf in a drift)."""


class ErgodicityError(SlowFastError):
    """The spectral-gap condition needed for ergodic averaging is not met."""


class PicardDivergenceError(SlowFastError):
    """The elliptic fixed-point iteration failed to contract."""
