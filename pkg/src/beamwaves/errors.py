"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A standing hypothesis required by an operation does not hold."""


class ConfigurationError(ValueError):
    """A numerical configuration (grid, time step, budget) is unusable."""


class MethodRefusedError(RuntimeError):
    """The exact method cannot certify its answer for these inputs."""


class NearSingularError(RuntimeError):
    """A Fourier multiplier on the finite range block is numerically zero."""

    def __init__(self, message, mode=None, value=None):
        super().__init__(message)
        self.mode = mode
        self.value = value


class NonConvergenceError(RuntimeError):
    """An iterative solve failed; carries the last residual for diagnostics."""

    def __init__(self, message, last_residual=float("nan"), iterations=0, diagnostics=None):
        super().__init__(message)
        self.last_residual = last_residual
        self.iterations = iterations
        self.diagnostics = diagnostics or {}
