"""Exception types shared across the library."""


class ShapeError(ValueError):
    """A matrix or vector does not have the shape implied by the system dimensions."""


class ConfigError(ValueError):
    """An experiment configuration is missing, malformed, or inconsistent."""


class IllConditionedError(RuntimeError):
    """A covariance matrix is too ill-conditioned to invert reliably."""


class NumericalDivergenceError(RuntimeError):
    """An adaptive recursion produced non-finite state."""


class DegenerateStateError(RuntimeError):
    """A filter or amplitude vector collapsed to zero norm."""
