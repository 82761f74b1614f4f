from dataclasses import dataclass
from typing import List, Sequence


class MilkFeverError(Exception):
    """
    Base class of every error raised by the package.

    ``exit_code`` is the status the command line returns when the error
    reaches it.
    """
    exit_code = 2


class ValidationError(MilkFeverError, ValueError):
    exit_code = 1


class ParameterError(ValidationError):
    """
    Parameter document rejected by the schema.

    Args:
        issues: One "path.to.field: message" string per violation.
    """
    def __init__(self, source: str, issues: Sequence[str]):
        self.source = source
        self.issues: List[str] = list(issues)
        lines = "\n  ".join(self.issues)
        super().__init__(f"Invalid parameter document '{source}':\n  {lines}")


@dataclass(frozen=True)
class RowError:
    line: int
    column: str
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}"
        if self.column:
            where += f", column '{self.column}'"
        return f"{where}: {self.message}"


class SurveyError(ValidationError):
    """Survey CSV with one or more rejected rows (or a broken header)."""
    def __init__(self, source: str, row_errors: Sequence[RowError]):
        self.source = source
        self.row_errors: List[RowError] = list(row_errors)
        shown = "\n  ".join(str(e) for e in self.row_errors[:20])
        extra = len(self.row_errors) - 20
        if extra > 0:
            shown += f"\n  ... {extra} more"
        super().__init__(f"Survey file '{source}' has {len(self.row_errors)} error(s):\n  {shown}")


class ComputationError(MilkFeverError, ArithmeticError):
    exit_code = 2


class SeparationError(ComputationError):
    """A design cell whose outcomes are all 0 or all 1."""
    def __init__(self, cell: str, outcome: int, size: int):
        self.cell = cell
        self.outcome = outcome
        self.size = size
        super().__init__(
            f"Complete separation in cell '{cell}': all {size} records have outcome {outcome}."
        )


class RankDeficiencyError(ComputationError):
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        super().__init__(f"Design matrix is rank deficient; collinear columns: {', '.join(self.columns)}")


class ConvergenceError(ComputationError):
    pass


class ReportIOError(MilkFeverError, OSError):
    exit_code = 3
