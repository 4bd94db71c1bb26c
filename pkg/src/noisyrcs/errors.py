"""Exception hierarchy shared by all modules."""


class NoisyRCSError(Exception):
    """Base class for every error raised by this package."""


class BoundsError(NoisyRCSError, ValueError):
    """A size or count parameter is outside its allowed range."""


class ConfigError(NoisyRCSError, ValueError):
    """A configuration object or channel spec is malformed."""


class ParseError(ConfigError):
    """A text input could not be parsed; carries the offending line."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ResourceError(NoisyRCSError):
    """The request exceeds a hard resource cap (qubits, enumeration size)."""


class DomainError(NoisyRCSError, ValueError):
    """A real-valued parameter is outside the domain of the operation."""


class UndefinedError(NoisyRCSError, ArithmeticError):
    """The requested quantity is mathematically undefined for this input."""


class RepairError(NoisyRCSError, ArithmeticError):
    """A truncated distribution has no positive mass left to renormalize."""
