"""Exception hierarchy shared by the estimator, the test and the CLI."""


class FastMIError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(FastMIError, ValueError):
    """Input data is malformed (non-finite values, wrong shape)."""


class InsufficientData(InvalidInput):
    """Too few observations for a stable estimate."""


class DomainError(FastMIError, ValueError):
    """An argument lies outside the domain of a function."""


class GridOverflow(FastMIError, ValueError):
    """A point falls outside the spatial grid extent."""


class AsymmetrySignal(FastMIError, ArithmeticError):
    """Inverse transform left an imaginary residue above tolerance."""


class NonConvergence(FastMIError, ArithmeticError):
    """An iteration did not converge.

    Attributes
    ----------
    n_unconverged : int
        Number of frequencies still moving when the iteration stopped.
    """

    def __init__(self, message, n_unconverged=0):
        super().__init__(message)
        self.n_unconverged = n_unconverged


class NumericalError(FastMIError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target.

    Attributes
    ----------
    error_estimate : float
        The error estimate actually achieved.
    """

    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(message)
        self.error_estimate = error_estimate


class NonFinite(NumericalError):
    """An estimate evaluated to a non-finite number."""


class ConfigError(FastMIError, ValueError):
    """A configuration value violates a precondition."""


class ParseError(InvalidInput):
    """A data file could not be parsed.

    Attributes
    ----------
    line : int or None
        1-based physical line number of the offending record.
    column : str or None
    """

    def __init__(self, message, line=None, column=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.column = column
