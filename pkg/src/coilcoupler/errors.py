"""Exception hierarchy; the CLI maps these onto exit codes."""


class CoilCouplerError(Exception):
    pass


class ConfigError(CoilCouplerError, ValueError):
    """Bad configuration text or an invalid parameter value."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SolverError(CoilCouplerError, RuntimeError):
    pass


class SingularityError(SolverError):
    """Two filaments touch, or a coil pair overlaps in space."""


class ConvergenceError(SolverError):
    pass
