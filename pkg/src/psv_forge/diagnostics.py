"""Source spans and diagnostic records shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple


class Span(NamedTuple):
    """1-based, inclusive source region."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int


ERROR = "error"
WARNING = "warning"
NOTE = "note"

# Structural warning codes.
SUPERFLUOUS_BULLET = "SuperfluousBullet"
SUPERFLUOUS_BRACE = "SuperfluousBrace"
SUPERFLUOUS_FOCUS = "SuperfluousFocus"
DEPRECATED_FOCUS = "DeprecatedFocus"

WARNING_CODES = frozenset(
    {SUPERFLUOUS_BULLET, SUPERFLUOUS_BRACE, SUPERFLUOUS_FOCUS, DEPRECATED_FOCUS}
)

# Proof-state error codes.
NO_FOCUSED_GOAL = "NoFocusedGoal"
PREVIOUS_BULLET_UNFINISHED = "PreviousBulletUnfinished"
NO_GOAL_FOR_BULLET = "NoGoalForBullet"
WRONG_BULLET = "WrongBullet"
BRACE_NOT_CLOSED = "BraceNotClosed"
MISMATCHED_BRACE = "MismatchedBrace"
FOCUS_OUT_OF_RANGE = "FocusOutOfRange"
MISMATCHED_UNFOCUS = "MismatchedUnfocus"
UNFOCUS_UNFINISHED = "UnfocusUnfinished"
OPEN_GOALS_AT_QED = "OpenGoalsAtQed"
ADMITTED_GOAL_AT_QED = "AdmittedGoalAtQed"


@dataclass(frozen=True)
class Diagnostic:
    """One reportable event: an error, a warning, or an informational note."""

    code: str
    message: str
    span: Span | None = None
    severity: str = ERROR

    def format(self, filename: str) -> str:
        line = self.span.start_line if self.span else 0
        col = self.span.start_col if self.span else 0
        return f"{filename}:{line}:{col}: [{self.code}] {self.message}"
