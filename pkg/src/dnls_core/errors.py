"""Error types for dnls-core."""

from __future__ import annotations

from typing import Any


class DnlsError(Exception):
    """Base error for dnls-core."""

    exit_code: int = 1


class InvalidArgumentError(DnlsError, ValueError):
    """A precondition on an argument does not hold."""

    exit_code = 2


class OutOfDomainError(DnlsError, ValueError):
    """A query point lies outside the domain of a sampled or truncated function."""

    exit_code = 2


class NumericOverflowError(DnlsError, ArithmeticError):
    """A state or Runge-Kutta stage became non-finite.

    ``overflow`` is set when some value went infinite rather than only NaN.
    """

    exit_code = 3

    def __init__(self, message: str, *, overflow: bool = True) -> None:
        super().__init__(message)
        self.overflow = overflow


class StepUnderflowError(DnlsError):
    """The adaptive step dropped below ``dt_min``.

    ``state`` is the last accepted state, kept for post-mortem inspection.
    """

    exit_code = 3

    def __init__(self, message: str, *, t: float, dt: float, state: Any = None) -> None:
        super().__init__(message)
        self.t = t
        self.dt = dt
        self.state = state


class DegenerateDataError(DnlsError, ValueError):
    """The data cannot support the requested fit (e.g. all zero)."""

    exit_code = 5


class NoEventError(DnlsError):
    """No rogue-wave event was found in the search window."""

    exit_code = 5


class ConfigError(DnlsError):
    """Configuration could not be parsed or validated."""

    exit_code = 2

    def __init__(self, message: str, key: str | None = None, line: int | None = None) -> None:
        where = ""
        if key is not None:
            where = f"{key}: "
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(f"{where}{message}")
        self.key = key
        self.line = line


class StorageError(DnlsError):
    """Writing run outputs failed; files written so far were removed."""

    exit_code = 4
