"""Exception types shared across the package."""


class SpecValidationError(ValueError):
    """A medium / pulse / config specification violates its invariants."""


class GridResolutionError(ValueError):
    """A grid is too coarse for the requested computation (aliasing, CFL, ...)."""


class InstabilityError(RuntimeError):
    """A marching scheme blew up (norm growth or NaNs)."""


class PicardConvergenceError(RuntimeError):
    """Fixed-point iteration for the translational travel time failed."""

    def __init__(self, residual, message=None):
        self.residual = residual
        super().__init__(message or f"Picard iteration stalled, residual={residual:.3e}")


class ProbeRangeError(ValueError):
    """A requested probe lies outside the simulated domain."""


class ConfigError(ValueError):
    """One or more errors in a plain-text run configuration."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))
