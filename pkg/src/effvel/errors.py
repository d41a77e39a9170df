"""Exception hierarchy shared by the solvers, oracles and the runner."""


class EffvelError(Exception):
    """Base class for all package errors."""


class GridMismatchError(EffvelError, ValueError):
    """An operator was applied on the wrong kind of grid, or sizes disagree."""


class InvalidFieldError(EffvelError, ValueError):
    """A field violates a structural requirement (e.g. odd symmetry at r=0)."""


class DensityFloorError(EffvelError):
    """Density dropped below the configured floor.

    Carries the simulation time and node index where the breach happened so the
    runner can report it.
    """

    def __init__(self, message, t=None, node=None, value=None):
        super().__init__(message)
        self.t = t
        self.node = node
        self.value = value


class SolverAbort(EffvelError):
    """Non-finite values or a failed linear solve inside a time integrator."""

    def __init__(self, message, t=None, node=None):
        super().__init__(message)
        self.t = t
        self.node = node


class PicardNonConvergence(EffvelError):
    """Fixed-point iteration did not reach the tolerance within k_max sweeps."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ConfigError(EffvelError, ValueError):
    """Experiment configuration failed validation."""
