"""Exception hierarchy shared by all modules."""


class OtimaError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(OtimaError, ValueError):
    """Argument outside the supported domain of a function."""


class SingularityError(OtimaError, ZeroDivisionError):
    """A formula hits a pole, e.g. a plasmon resonance at eps = -2."""


class PrecisionError(OtimaError, ArithmeticError):
    """A truncated series or quadrature did not converge."""


class ConfigError(OtimaError, ValueError):
    """Invalid configuration or data file.

    ``key`` and ``line`` locate the offending entry when known.
    """

    def __init__(self, message, key=None, line=None, path=None):
        self.key = key
        self.line = line
        self.path = path
        where = [str(p) for p in (path,) if p is not None]
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class VerificationError(OtimaError):
    """An oracle disagrees with the closed form it checks."""


class DegenerateSignalError(OtimaError, ZeroDivisionError):
    """Mean signal S0 vanishes, so a visibility is undefined."""
