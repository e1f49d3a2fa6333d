"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ValidationError -> 1,
InputFormatError -> 2, NumericError -> 3.
"""


class AnatomyError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AnatomyError):
    """Bad argument values or inputs violating a documented precondition."""


class InputFormatError(AnatomyError):
    """Unreadable or malformed input files (bad magic, corrupt lines, ...)."""


class MergeParseError(InputFormatError):
    """A merge file line that is not exactly two space-separated symbols."""

    def __init__(self, line_no: int, line: str):
        self.line_no = line_no
        self.line = line
        super().__init__(f"line {line_no}: expected two space-separated symbols, got {line!r}")


class NumericError(AnatomyError):
    """Non-finite values or numeric failure inside a computation.

    ``op`` names the operation that produced the bad value, when known.
    """

    def __init__(self, message: str, op: str | None = None):
        self.op = op
        super().__init__(message if op is None else f"{message} (op '{op}')")


class TrainingDivergedError(NumericError):
    """Loss became non-finite; carries the last step with a finite loss."""

    def __init__(self, last_finite_step: int):
        self.last_finite_step = last_finite_step
        super().__init__(f"training diverged; last finite step was {last_finite_step}")
