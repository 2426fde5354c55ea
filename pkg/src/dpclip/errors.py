"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A run or experiment configuration violates a required constraint."""


class DivergenceError(RuntimeError):
    """An optimizer run produced a non-finite iterate."""

    def __init__(self, message, iteration=None, stage=None):
        super().__init__(message)
        self.iteration = iteration
        self.stage = stage


class ReferenceSolveError(RuntimeError):
    """The reference minimizer did not reach its gradient tolerance."""

    def __init__(self, message, grad_norm):
        super().__init__(message)
        self.grad_norm = grad_norm
