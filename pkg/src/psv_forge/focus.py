"""Proof-wide state: focused goals plus a stack of focusing frames.

Bullets, braces and Focus/Unfocus push and pop frames; a frame holds the
goals set aside at that level. Exhausted frames (no focused goals, empty
pending list) are auto-closed lazily when a structural token or the proof
terminator needs to look past them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import diagnostics as dg
from .script_parser import (
    Bullet,
    BraceClose,
    BraceOpen,
    Completion,
    FocusCmd,
    SentenceKind,
    UnfocusCmd,
)
from .tactics import (
    Closed,
    ClosedAdmitted,
    Goal,
    NameGen,
    Subgoals,
    Tactic,
    TacticOutcome,
    apply_tactic,
)

ROOT = "root"
BULLET = "bullet"
BRACE = "brace"
FOCUS = "focus"


@dataclass(frozen=True)
class Frame:
    kind: str
    pending: tuple[Goal, ...] = ()
    opened_at: int = -1
    symbol: str = ""  # bullet frames only
    depth: int = 0  # bullet frames only
    n: int = 0  # focus frames only


@dataclass(frozen=True)
class ProofState:
    focused: tuple[Goal, ...]
    stack: tuple[Frame, ...]
    admitted_any: bool = False
    step_index: int = 0

    def unfocused_count(self) -> int:
        return sum(len(f.pending) for f in self.stack)

    def all_goals(self) -> tuple[Goal, ...]:
        out = list(self.focused)
        for f in self.stack:
            out.extend(f.pending)
        return tuple(out)


class ProofCheckError(Exception):
    """A structural or terminator rule was violated."""

    def __init__(self, code: str, message: str, opened_at: int | None = None):
        self.code = code
        self.opened_at = opened_at
        super().__init__(message)


@dataclass(frozen=True)
class StructResult:
    state: ProofState
    warnings: tuple[str, ...]  # warning codes
    event: str  # "push" | "next" | "close"
    auto_closed: int  # frames popped before the token's own effect


def init_state(root_goal: Goal) -> ProofState:
    return ProofState(focused=(root_goal,), stack=(Frame(ROOT),))


def step_tactic(
    state: ProofState, tactic: Tactic, gen: NameGen
) -> tuple[ProofState, TacticOutcome]:
    """Apply a tactic to the first focused goal."""
    if not state.focused:
        raise ProofCheckError(dg.NO_FOCUSED_GOAL, "no more goals")
    target = state.focused[0]
    outcome = apply_tactic(target, tactic, gen, step=state.step_index + 1)
    if isinstance(outcome, (Closed, ClosedAdmitted)):
        focused = state.focused[1:]
    else:
        assert isinstance(outcome, Subgoals)
        focused = outcome.goals + state.focused[1:]
    new = ProofState(
        focused=focused,
        stack=state.stack,
        admitted_any=state.admitted_any or isinstance(outcome, ClosedAdmitted),
        step_index=state.step_index + 1,
    )
    return new, outcome


def _auto_close(state: ProofState) -> tuple[ProofState, int]:
    stack = list(state.stack)
    popped = 0
    while len(stack) > 1 and not state.focused and not stack[-1].pending:
        stack.pop()
        popped += 1
    if popped:
        state = replace(state, stack=tuple(stack))
    return state, popped


def step_structural(
    state: ProofState, kind: SentenceKind, sentence_index: int = -1
) -> StructResult:
    """Apply a bullet, brace, or Focus/Unfocus token to the state."""
    bump = state.step_index + 1
    if isinstance(kind, Bullet):
        return _bullet(state, kind, sentence_index, bump)
    if isinstance(kind, BraceOpen):
        if not state.focused:
            raise ProofCheckError(dg.NO_FOCUSED_GOAL, "no goal to focus with '{'")
        warns: tuple[str, ...] = ()
        if len(state.focused) == 1 and state.stack[-1].kind != ROOT:
            warns = (dg.SUPERFLUOUS_BRACE,)
        frame = Frame(BRACE, pending=state.focused[1:], opened_at=sentence_index)
        new = ProofState(
            focused=state.focused[:1],
            stack=state.stack + (frame,),
            admitted_any=state.admitted_any,
            step_index=bump,
        )
        return StructResult(new, warns, "push", 0)
    if isinstance(kind, BraceClose):
        if state.focused:
            raise ProofCheckError(
                dg.BRACE_NOT_CLOSED,
                f"'}}' reached with {len(state.focused)} unfinished goal(s)",
            )
        state, popped = _auto_close(state)
        top = state.stack[-1]
        if top.kind != BRACE:
            raise ProofCheckError(
                dg.MISMATCHED_BRACE, "'}' does not match an open '{'",
                opened_at=top.opened_at if top.kind != ROOT else None,
            )
        new = ProofState(
            focused=top.pending,
            stack=state.stack[:-1],
            admitted_any=state.admitted_any,
            step_index=bump,
        )
        return StructResult(new, (), "close", popped)
    if isinstance(kind, FocusCmd):
        n = kind.n
        if not 1 <= n <= len(state.focused):
            raise ProofCheckError(
                dg.FOCUS_OUT_OF_RANGE,
                f"Focus {n} with {len(state.focused)} goal(s) in focus",
            )
        warns = (dg.DEPRECATED_FOCUS,)
        if len(state.focused) == 1:
            warns += (dg.SUPERFLUOUS_FOCUS,)
        pending = state.focused[: n - 1] + state.focused[n:]
        frame = Frame(FOCUS, pending=pending, opened_at=sentence_index, n=n)
        new = ProofState(
            focused=(state.focused[n - 1],),
            stack=state.stack + (frame,),
            admitted_any=state.admitted_any,
            step_index=bump,
        )
        return StructResult(new, warns, "push", 0)
    if isinstance(kind, UnfocusCmd):
        state, popped = _auto_close(state)
        top = state.stack[-1]
        if top.kind != FOCUS:
            raise ProofCheckError(
                dg.MISMATCHED_UNFOCUS, "Unfocus without a matching Focus"
            )
        if state.focused:
            raise ProofCheckError(
                dg.UNFOCUS_UNFINISHED,
                f"Unfocus with {len(state.focused)} unfinished goal(s)",
                opened_at=top.opened_at,
            )
        new = ProofState(
            focused=top.pending,
            stack=state.stack[:-1],
            admitted_any=state.admitted_any,
            step_index=bump,
        )
        return StructResult(new, (), "close", popped)
    raise TypeError(f"not a structural token: {kind!r}")


def _bullet(
    state: ProofState, kind: Bullet, sentence_index: int, bump: int
) -> StructResult:
    match_idx = None
    for i, frame in enumerate(state.stack):
        if frame.kind == BULLET and frame.symbol == kind.symbol and frame.depth == kind.depth:
            match_idx = i
    token = kind.symbol * kind.depth

    if match_idx is None:
        if not state.focused:
            if any(f.kind == BULLET and f.pending for f in state.stack):
                raise ProofCheckError(
                    dg.WRONG_BULLET,
                    f"bullet {token!r} does not match the current bullet level",
                )
            raise ProofCheckError(
                dg.NO_GOAL_FOR_BULLET, f"no goal left for bullet {token!r}"
            )
        warns: tuple[str, ...] = ()
        if len(state.focused) == 1:
            warns = (dg.SUPERFLUOUS_BULLET,)
        frame = Frame(
            BULLET,
            pending=state.focused[1:],
            opened_at=sentence_index,
            symbol=kind.symbol,
            depth=kind.depth,
        )
        new = ProofState(
            focused=state.focused[:1],
            stack=state.stack + (frame,),
            admitted_any=state.admitted_any,
            step_index=bump,
        )
        return StructResult(new, warns, "push", 0)

    # A frame for this bullet exists: frames above it must be exhausted.
    popped = 0
    if match_idx != len(state.stack) - 1:
        if state.focused or any(
            f.pending for f in state.stack[match_idx + 1 :]
        ):
            raise ProofCheckError(
                dg.WRONG_BULLET,
                f"bullet {token!r} while an inner level is unfinished",
            )
        popped = len(state.stack) - 1 - match_idx
        state = replace(state, stack=state.stack[: match_idx + 1])
    frame = state.stack[-1]
    if state.focused:
        raise ProofCheckError(
            dg.PREVIOUS_BULLET_UNFINISHED,
            f"bullet {token!r} while the previous one is unfinished",
            opened_at=frame.opened_at,
        )
    if not frame.pending:
        raise ProofCheckError(
            dg.NO_GOAL_FOR_BULLET, f"no goal left for bullet {token!r}"
        )
    new_frame = replace(frame, pending=frame.pending[1:])
    new = ProofState(
        focused=(frame.pending[0],),
        stack=state.stack[:-1] + (new_frame,),
        admitted_any=state.admitted_any,
        step_index=bump,
    )
    return StructResult(new, (), "next", popped)


def finalize(state: ProofState, completion: Completion) -> Completion:
    """Check the terminator against the remaining state."""
    if completion is Completion.ADMITTED:
        return completion
    remaining = len(state.all_goals())
    if remaining:
        raise ProofCheckError(
            dg.OPEN_GOALS_AT_QED,
            f"{completion.value} with {remaining} open goal(s)",
        )
    if state.admitted_any:
        raise ProofCheckError(
            dg.ADMITTED_GOAL_AT_QED,
            f"admit was used but the proof ends with {completion.value}",
        )
    return completion
