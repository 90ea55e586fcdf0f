"""Exception types and the process exit codes they map to."""

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class FWError(Exception):
    """Base class for all errors raised by fwgap."""

    exit_code = EXIT_USAGE


class UsageError(FWError, ValueError):
    """Bad input: dimension mismatch, infeasible point, invalid parameter."""


class ConfigError(UsageError):
    """A config file failed to parse or validate.

    ``field`` names the offending ``section.key`` and ``line`` the 1-based
    source line, when known.
    """

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line


class UnsupportedOperation(FWError, NotImplementedError):
    """The operation exists but is not supported for this domain/objective."""


class NumericError(FWError, ArithmeticError):
    """A non-finite value showed up during a computation."""

    exit_code = EXIT_NUMERIC


class OracleError(FWError, RuntimeError):
    """An internal invariant broke, e.g. an LMO returned a non-minimizer."""

    exit_code = EXIT_NUMERIC
