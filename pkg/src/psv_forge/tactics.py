"""Tactic syntax and deterministic single-goal semantics.

Supported tactic set: intro/intros, exact, assumption, apply, split,
left/right, exists, destruct (with [a b] / [a | b] / [x P] patterns),
reflexivity, exfalso, contradiction, clear, rename, move, admit.
Anything else is rejected as unknown; the enclosing proof is then rendered
with a diagnostic instead of aborting the whole file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import formula as fm
from .formula import (
    And,
    App,
    Atom,
    Equal,
    Exists,
    FalseF,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Term,
    Var,
    alpha_equal,
    match_formula,
    substitute,
)

# Display placeholder for a variable binding introduced by intro/destruct.
VAR_SORT = Atom("_")

FormulaLike = Union[Formula, str]


@dataclass(frozen=True)
class Hypothesis:
    name: str
    formula: FormulaLike
    intro_step: int = 0


@dataclass(frozen=True)
class Goal:
    id: int
    hyps: tuple[Hypothesis, ...]
    concl: FormulaLike

    def hyp(self, name: str) -> Hypothesis | None:
        for h in self.hyps:
            if h.name == name:
                return h
        return None

    def hyp_names(self) -> set[str]:
        return {h.name for h in self.hyps}


# --- tactic grammar --------------------------------------------------------


class Tactic:
    __slots__ = ()


@dataclass(frozen=True)
class Intro(Tactic):
    name: str | None = None


@dataclass(frozen=True)
class Intros(Tactic):
    names: tuple[str, ...] = ()  # empty means: repeat until nothing applies


@dataclass(frozen=True)
class Exact(Tactic):
    name: str


@dataclass(frozen=True)
class Assumption(Tactic):
    pass


@dataclass(frozen=True)
class Apply(Tactic):
    name: str


@dataclass(frozen=True)
class Split(Tactic):
    pass


@dataclass(frozen=True)
class LeftChoice(Tactic):
    pass


@dataclass(frozen=True)
class RightChoice(Tactic):
    pass


@dataclass(frozen=True)
class ExistsWitness(Tactic):
    witness: Term


@dataclass(frozen=True)
class Destruct(Tactic):
    name: str
    # disjunctive branches of conjunctive name lists:
    # [a b] -> ((a, b),)   [a | b] -> ((a,), (b,))   [x P] -> ((x, P),)
    pattern: tuple[tuple[str, ...], ...] | None = None


@dataclass(frozen=True)
class Reflexivity(Tactic):
    pass


@dataclass(frozen=True)
class Exfalso(Tactic):
    pass


@dataclass(frozen=True)
class Contradiction(Tactic):
    pass


@dataclass(frozen=True)
class Clear(Tactic):
    names: tuple[str, ...]


@dataclass(frozen=True)
class Rename(Tactic):
    old: str
    new: str


@dataclass(frozen=True)
class Move(Tactic):
    name: str
    position: str  # "before" | "after"
    anchor: str


@dataclass(frozen=True)
class AdmitGoal(Tactic):
    pass


# --- outcomes ---------------------------------------------------------------


@dataclass(frozen=True)
class Closed:
    pass


@dataclass(frozen=True)
class ClosedAdmitted:
    pass


@dataclass(frozen=True)
class Subgoals:
    goals: tuple[Goal, ...]


TacticOutcome = Union[Closed, ClosedAdmitted, Subgoals]


# --- errors -----------------------------------------------------------------


class UnknownTactic(Exception):
    code = "UnknownTactic"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown tactic {name!r}")


class MalformedTactic(Exception):
    code = "MalformedTactic"


class TacticFailure(Exception):
    code = "TacticFailure"

    def __init__(self, reason: str, code: str | None = None):
        self.reason = reason
        if code is not None:
            self.code = code
        super().__init__(reason)


# --- parsing ----------------------------------------------------------------

_DESTRUCT_RE = re.compile(r"^destruct\s+(\S+)(?:\s+as\s+\[(.*)\])?\s*$", re.DOTALL)
_RENAME_RE = re.compile(r"^rename\s+(\S+)\s+into\s+(\S+)$")
_MOVE_RE = re.compile(r"^move\s+(\S+)\s+(before|after)\s+(\S+)$")


def _require_ident(token: str) -> str:
    if not fm.is_identifier(token):
        raise MalformedTactic(f"expected an identifier, got {token!r}")
    return token


def parse_tactic(body: str) -> Tactic:
    """Parse one tactic sentence body (no trailing period)."""
    text = " ".join(body.split())
    if not text:
        raise MalformedTactic("empty tactic")
    head = text.split(None, 1)[0]
    rest = text[len(head):].strip()

    if head == "intro":
        if not rest:
            return Intro()
        return Intro(_require_ident(rest))
    if head == "intros":
        names = tuple(_require_ident(n) for n in rest.split()) if rest else ()
        return Intros(names)
    if head == "exact":
        if not rest:
            raise MalformedTactic("exact needs a hypothesis name")
        return Exact(_require_ident(rest))
    if head == "assumption":
        _no_args(head, rest)
        return Assumption()
    if head == "apply":
        if not rest:
            raise MalformedTactic("apply needs a hypothesis name")
        return Apply(_require_ident(rest))
    if head == "split":
        _no_args(head, rest)
        return Split()
    if head == "left":
        _no_args(head, rest)
        return LeftChoice()
    if head == "right":
        _no_args(head, rest)
        return RightChoice()
    if head == "exists":
        if not rest:
            raise MalformedTactic("exists needs a witness term")
        try:
            witness = fm.parse_term(rest)
        except fm.FormulaParseError as exc:
            raise MalformedTactic(f"bad witness term: {exc}") from exc
        return ExistsWitness(witness)
    if head == "destruct":
        m = _DESTRUCT_RE.match(text)
        if m is None:
            raise MalformedTactic("expected: destruct H [as [..]]")
        name = _require_ident(m.group(1))
        if m.group(2) is None:
            return Destruct(name)
        branches = []
        for branch in m.group(2).split("|"):
            names = tuple(_require_ident(n) for n in branch.split())
            if not names:
                raise MalformedTactic("empty destruct pattern branch")
            branches.append(names)
        return Destruct(name, tuple(branches))
    if head == "reflexivity":
        _no_args(head, rest)
        return Reflexivity()
    if head == "exfalso":
        _no_args(head, rest)
        return Exfalso()
    if head == "contradiction":
        _no_args(head, rest)
        return Contradiction()
    if head == "clear":
        if not rest:
            raise MalformedTactic("clear needs at least one hypothesis name")
        return Clear(tuple(_require_ident(n) for n in rest.split()))
    if head == "rename":
        m = _RENAME_RE.match(text)
        if m is None:
            raise MalformedTactic("expected: rename H into H'")
        return Rename(_require_ident(m.group(1)), _require_ident(m.group(2)))
    if head == "move":
        m = _MOVE_RE.match(text)
        if m is None:
            raise MalformedTactic("expected: move H before|after H'")
        return Move(_require_ident(m.group(1)), m.group(2), _require_ident(m.group(3)))
    if head == "admit":
        _no_args(head, rest)
        return AdmitGoal()
    raise UnknownTactic(head)


def _no_args(head: str, rest: str) -> None:
    if rest:
        raise MalformedTactic(f"{head} takes no arguments, got {rest!r}")


# --- fresh names ------------------------------------------------------------


class NameGen:
    """Allocates goal ids; hypothesis names are derived from the context."""

    def __init__(self, start: int = 1):
        self._next = start

    def next_goal_id(self) -> int:
        gid = self._next
        self._next += 1
        return gid


def fresh_hyp_name(taken: set[str]) -> str:
    if "H" not in taken:
        return "H"
    i = 0
    while f"H{i}" in taken:
        i += 1
    return f"H{i}"


def fresh_var_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 0
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


# --- semantics ----------------------------------------------------------------


def apply_tactic(goal: Goal, tactic: Tactic, gen: NameGen, step: int = 0) -> TacticOutcome:
    """Apply one tactic to one goal.

    Multi-subgoal outcomes keep the acted-on goal's id for the first subgoal
    and allocate fresh ids for the rest, so a goal id names one proof
    obligation lineage from creation to closure.
    """
    if isinstance(goal.concl, str) or any(isinstance(h.formula, str) for h in goal.hyps):
        raise TacticFailure("cannot run tactics on opaque trace goals")

    if isinstance(tactic, Intro):
        return Subgoals((_intro_once(goal, tactic.name, step),))
    if isinstance(tactic, Intros):
        g = goal
        if tactic.names:
            for name in tactic.names:
                g = _intro_once(g, name, step)
        else:
            while True:
                try:
                    g = _intro_once(g, None, step)
                except TacticFailure:
                    break
        return Subgoals((g,))
    if isinstance(tactic, Exact):
        h = _need_hyp(goal, tactic.name)
        if alpha_equal(h.formula, goal.concl):
            return Closed()
        raise TacticFailure(f"{tactic.name} does not prove the conclusion")
    if isinstance(tactic, Assumption):
        for h in goal.hyps:
            if isinstance(h.formula, Formula) and alpha_equal(h.formula, goal.concl):
                return Closed()
        raise TacticFailure("no hypothesis matches the conclusion")
    if isinstance(tactic, Apply):
        return _apply_hyp(goal, tactic.name, gen, step)
    if isinstance(tactic, Split):
        c = goal.concl
        if isinstance(c, And):
            return _branch(goal, [c.left, c.right], gen)
        if isinstance(c, Iff):
            return _branch(goal, [Implies(c.left, c.right), Implies(c.right, c.left)], gen)
        raise TacticFailure("split expects a conjunction or an equivalence")
    if isinstance(tactic, LeftChoice) or isinstance(tactic, RightChoice):
        c = goal.concl
        if not isinstance(c, Or):
            raise TacticFailure("left/right expect a disjunction")
        chosen = c.left if isinstance(tactic, LeftChoice) else c.right
        return Subgoals((Goal(goal.id, goal.hyps, chosen),))
    if isinstance(tactic, ExistsWitness):
        c = goal.concl
        if not isinstance(c, Exists):
            raise TacticFailure("exists expects an existential conclusion")
        return Subgoals((Goal(goal.id, goal.hyps, substitute(c.body, c.var, tactic.witness)),))
    if isinstance(tactic, Destruct):
        return _destruct(goal, tactic, gen, step)
    if isinstance(tactic, Reflexivity):
        c = goal.concl
        if isinstance(c, Equal) and c.lhs == c.rhs:
            return Closed()
        raise TacticFailure("conclusion is not an equality with equal sides")
    if isinstance(tactic, Exfalso):
        return Subgoals((Goal(goal.id, goal.hyps, FalseF()),))
    if isinstance(tactic, Contradiction):
        return _contradiction(goal)
    if isinstance(tactic, Clear):
        hyps = list(goal.hyps)
        for name in tactic.names:
            h = _need_hyp(goal, name)
            hyps = [x for x in hyps if x.name != h.name]
        return Subgoals((Goal(goal.id, tuple(hyps), goal.concl),))
    if isinstance(tactic, Rename):
        h = _need_hyp(goal, tactic.old)
        if tactic.new != tactic.old and tactic.new in goal.hyp_names():
            raise TacticFailure(f"name {tactic.new!r} is already used")
        hyps = tuple(
            Hypothesis(tactic.new, x.formula, x.intro_step) if x.name == tactic.old else x
            for x in goal.hyps
        )
        return Subgoals((Goal(goal.id, hyps, goal.concl),))
    if isinstance(tactic, Move):
        h = _need_hyp(goal, tactic.name)
        _need_hyp(goal, tactic.anchor)
        if tactic.name == tactic.anchor:
            raise TacticFailure("cannot move a hypothesis around itself")
        rest = [x for x in goal.hyps if x.name != tactic.name]
        idx = next(i for i, x in enumerate(rest) if x.name == tactic.anchor)
        if tactic.position == "after":
            idx += 1
        rest.insert(idx, h)
        return Subgoals((Goal(goal.id, tuple(rest), goal.concl),))
    if isinstance(tactic, AdmitGoal):
        return ClosedAdmitted()
    raise TacticFailure(f"unhandled tactic {tactic!r}")


def _need_hyp(goal: Goal, name: str) -> Hypothesis:
    h = goal.hyp(name)
    if h is None:
        raise TacticFailure(f"no hypothesis named {name!r}")
    return h


def _intro_once(goal: Goal, name: str | None, step: int) -> Goal:
    c = goal.concl
    if isinstance(c, Not):
        c = Implies(c.body, FalseF())
    if isinstance(c, Implies):
        hyp_name = name if name is not None else fresh_hyp_name(goal.hyp_names())
        if goal.hyp(hyp_name) is not None:
            raise TacticFailure(f"name {hyp_name!r} is already used")
        hyp = Hypothesis(hyp_name, c.left, step)
        return Goal(goal.id, goal.hyps + (hyp,), c.right)
    if isinstance(c, Forall):
        var_name = name if name is not None else fresh_var_name(c.var, goal.hyp_names())
        if goal.hyp(var_name) is not None:
            raise TacticFailure(f"name {var_name!r} is already used")
        hyp = Hypothesis(var_name, VAR_SORT, step)
        body = substitute(c.body, c.var, Var(var_name)) if var_name != c.var else c.body
        return Goal(goal.id, goal.hyps + (hyp,), body)
    raise TacticFailure("nothing to introduce")


def _branch(goal: Goal, concls: list[Formula], gen: NameGen) -> Subgoals:
    goals = [Goal(goal.id, goal.hyps, concls[0])]
    for c in concls[1:]:
        goals.append(Goal(gen.next_goal_id(), goal.hyps, c))
    return Subgoals(tuple(goals))


def _apply_hyp(goal: Goal, name: str, gen: NameGen, step: int) -> TacticOutcome:
    h = _need_hyp(goal, name)
    if not isinstance(h.formula, Formula):
        raise TacticFailure(f"{name!r} is not an applicable statement")
    pattern_vars: set[str] = set()
    body = h.formula
    while isinstance(body, Forall):
        pattern_vars.add(body.var)
        body = body.body
    premises: list[Formula] = []
    while isinstance(body, Implies):
        premises.append(body.left)
        body = body.right
    subst = match_formula(body, goal.concl, pattern_vars)
    if subst is None:
        raise TacticFailure(f"cannot unify the conclusion with {name!r}")
    unresolved = pattern_vars - subst.keys()
    if unresolved:
        raise TacticFailure(
            f"cannot infer an instance for {sorted(unresolved)!r}",
            code="UnresolvedInstance",
        )
    if not premises:
        return Closed()
    instantiated = []
    for p in premises:
        for var, term in subst.items():
            p = substitute(p, var, term)
        instantiated.append(p)
    return _branch(goal, instantiated, gen)


def _destruct(goal: Goal, tactic: Destruct, gen: NameGen, step: int) -> TacticOutcome:
    h = _need_hyp(goal, tactic.name)
    f = h.formula
    if not isinstance(f, Formula):
        raise TacticFailure(f"cannot destruct opaque {tactic.name!r}")
    at = next(i for i, x in enumerate(goal.hyps) if x.name == h.name)
    before = goal.hyps[:at]
    after = goal.hyps[at + 1 :]
    others = {x.name for x in before + after}

    def conj_names(count: int) -> list[str]:
        if tactic.pattern is not None:
            if len(tactic.pattern) != 1 or len(tactic.pattern[0]) != count:
                raise TacticFailure(f"pattern must name exactly {count} parts")
            names = list(tactic.pattern[0])
        else:
            names = []
            taken = set(others)
            for _ in range(count):
                n = fresh_hyp_name(taken)
                taken.add(n)
                names.append(n)
        _check_fresh(names, others)
        return names

    if isinstance(f, And):
        names = conj_names(2)
        hyps = before + (
            Hypothesis(names[0], f.left, step),
            Hypothesis(names[1], f.right, step),
        ) + after
        return Subgoals((Goal(goal.id, hyps, goal.concl),))
    if isinstance(f, Or):
        if tactic.pattern is not None:
            if len(tactic.pattern) != 2 or any(len(b) != 1 for b in tactic.pattern):
                raise TacticFailure("pattern must be [a | b] for a disjunction")
            branch_names = [tactic.pattern[0][0], tactic.pattern[1][0]]
        else:
            branch_names = [fresh_hyp_name(others), fresh_hyp_name(others)]
        _check_fresh(branch_names[:1], others)
        _check_fresh(branch_names[1:], others)
        left = Goal(
            goal.id,
            before + (Hypothesis(branch_names[0], f.left, step),) + after,
            goal.concl,
        )
        right = Goal(
            gen.next_goal_id(),
            before + (Hypothesis(branch_names[1], f.right, step),) + after,
            goal.concl,
        )
        return Subgoals((left, right))
    if isinstance(f, Exists):
        if tactic.pattern is not None:
            if len(tactic.pattern) != 1 or len(tactic.pattern[0]) != 2:
                raise TacticFailure("pattern must be [x P] for an existential")
            var_name, hyp_name = tactic.pattern[0]
            _check_fresh([var_name, hyp_name], others)
        else:
            var_name = fresh_var_name(f.var, others)
            hyp_name = fresh_hyp_name(others | {var_name})
        witness = Hypothesis(var_name, VAR_SORT, step)
        body = substitute(f.body, f.var, Var(var_name))
        hyps = before + (witness, Hypothesis(hyp_name, body, step)) + after
        return Subgoals((Goal(goal.id, hyps, goal.concl),))
    if isinstance(f, FalseF):
        return Closed()
    raise TacticFailure(f"cannot destruct {tactic.name!r}: unsupported shape")


def _check_fresh(names: list[str], others: set[str]) -> None:
    seen = set(others)
    for n in names:
        if n in seen:
            raise TacticFailure(f"name {n!r} is already used")
        seen.add(n)


def _contradiction(goal: Goal) -> Closed:
    formulas = [h.formula for h in goal.hyps if isinstance(h.formula, Formula)]
    for f in formulas:
        if isinstance(f, FalseF):
            return Closed()
    for f in formulas:
        negated: Formula | None = None
        if isinstance(f, Not):
            negated = f.body
        elif isinstance(f, Implies) and isinstance(f.right, FalseF):
            negated = f.left
        if negated is None:
            continue
        for g in formulas:
            if alpha_equal(g, negated):
                return Closed()
    raise TacticFailure("no contradiction in the context")
