"""Exception hierarchy shared by every tailrank module."""

from typing import Optional


class TailRankError(Exception):
    """Base class for all errors raised by tailrank."""


class UsageError(TailRankError, ValueError):
    """Bad arguments: wrong shapes, out-of-range parameters, conflicting flags."""


class NumericalError(TailRankError, ArithmeticError):
    """A numerical routine failed to produce a usable result."""


class DivergenceError(NumericalError):
    """The solver produced a non-finite objective."""

    def __init__(self, iteration: int, value: float):
        self.iteration = iteration
        self.value = value
        super().__init__(f"objective diverged at iteration {iteration} (value={value!r})")


class UndefinedMetricError(TailRankError, ValueError):
    """No example satisfies the condition a ranking metric needs."""


class DataFormatError(TailRankError, ValueError):
    """Malformed input file; carries the path and 1-based line number."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:"
        if line is not None:
            location += f"{line}:"
        super().__init__(f"{location} {message}" if location else message)


class ArffParseError(DataFormatError):
    pass


class ModelFormatError(DataFormatError):
    pass
