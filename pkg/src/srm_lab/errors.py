"""Exception hierarchy shared by the library and the CLI."""


class SrmLabError(Exception):
    pass


class ConfigError(SrmLabError):
    """Invalid configuration or input file (CLI exit code 2)."""


class NumericalError(SrmLabError):
    """A computation could not be completed (CLI exit code 3)."""


class ConvergenceError(NumericalError):
    def __init__(self, message, gap=None, iterations=None):
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations


class PreconditionError(SrmLabError, ValueError):
    """A theorem's stated applicability condition does not hold."""
