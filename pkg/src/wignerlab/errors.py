"""Exception hierarchy shared by the whole package."""


class WignerLabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WignerLabError):
    """Invalid configuration value. Carries the offending field name."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnphysicalStateError(WignerLabError):
    """Requested state violates the uncertainty bound."""


class DomainTooSmallError(WignerLabError):
    """State support leaks past the grid boundary above tolerance."""


class ResolutionError(WignerLabError):
    """Operation would push significant mass outside the resolvable band."""


class NumericsError(WignerLabError):
    """Numerical abort (NaN/Inf or norm drift). Carries the step index."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)


class UnsupportedModelError(WignerLabError):
    """Operation requires a potential family it does not support."""


class AlreadyQuantumError(WignerLabError):
    """No classical epoch exists: the initial patch is not large on the
    hbar scale, so the breakdown-time logarithm has no positive argument."""
