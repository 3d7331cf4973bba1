"""Exception types shared across the library."""


class ParseError(ValueError):
    """Malformed input row. Carries the offending 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EmptyInputError(ValueError):
    """Input contained no usable data rows."""


class RangeError(ValueError):
    """Requested date range is empty or outside the available data."""


class SingularDesignError(ValueError):
    """Design matrix is rank deficient. Names a dependent column."""

    def __init__(self, message: str, column: str | None = None):
        if column is not None:
            message = f"{message} (column {column!r})"
        super().__init__(message)
        self.column = column


class InsufficientDataError(ValueError):
    """Not enough observations for the requested estimation."""


class ContractError(ValueError):
    """Caller violated a documented precondition."""


class ZeroVarianceError(ValueError):
    """Series is constant; the statistic is undefined."""


class FilterError(RuntimeError):
    """Numerical breakdown inside a filtering recursion. Carries the step index."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} at step {step}")
        self.step = step


class StageError(RuntimeError):
    """A pipeline stage failed. Names the stage; the original is __cause__."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
