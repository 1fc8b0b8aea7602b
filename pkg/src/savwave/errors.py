"""Exception types shared across the solver."""


class SavwaveError(Exception):
    pass


class ConfigurationError(SavwaveError, ValueError):
    """Invalid problem or run setup (bad parameters, missing exact solution, ...)."""


class SolverError(SavwaveError, RuntimeError):
    """A linear solve did not reach the requested relative residual."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


class SingularUpdateError(SolverError):
    """The Sherman-Morrison denominator vanished."""
