"""Exception types shared across the package."""


class DaneBenchError(Exception):
    """Base class for all package errors."""


class ConfigError(DaneBenchError, ValueError):
    """A configuration value is missing, malformed, or inconsistent.

    ``key`` is the dotted path of the offending entry when known.
    """

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class ContractViolation(DaneBenchError, ValueError):
    """An argument broke a documented precondition (shape, emptiness)."""


class UnsupportedError(DaneBenchError, NotImplementedError):
    """The requested combination of loss, solver, or access mode is not supported."""


class NumericalError(DaneBenchError, ArithmeticError):
    """A linear solve failed or an iterate stopped being finite."""

    def __init__(self, message: str, round: int | None = None, machine: int | None = None):
        self.round = round
        self.machine = machine
        where = []
        if round is not None:
            where.append(f"round {round}")
        if machine is not None:
            where.append(f"machine {machine}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
