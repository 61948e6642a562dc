"""Labelled proof trees: one per proof, built by replaying the script.

Straight-line tactics chain (each node is the child of the previous one);
every structural token that changes focus opens a sibling branch under the
node that created the goals being distributed. The synthetic root node is
the statement row, so the initial sequent is rendered before any tactic.
`Proof.` adds no node and the terminator only stamps the label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from . import diagnostics as dg
from .diagnostics import Diagnostic, Span
from .focus import (
    ProofCheckError,
    ProofState,
    StructResult,
    finalize,
    init_state,
    step_structural,
    step_tactic,
)
from .formula import Formula, FormulaParseError, parse_formula
from .script_parser import (
    Bullet,
    BraceClose,
    BraceOpen,
    Completion,
    FocusCmd,
    OtherVernacular,
    ProofEnd,
    ProofOpen,
    Sentence,
    StatementHeader,
    TacticSentence,
    TheoremKind,
    UnfocusCmd,
)
from .tactics import (
    Closed,
    ClosedAdmitted,
    Goal,
    MalformedTactic,
    NameGen,
    Subgoals,
    TacticFailure,
    UnknownTactic,
    parse_tactic,
)

STRUCTURAL_KINDS = (Bullet, BraceOpen, BraceClose, FocusCmd, UnfocusCmd)


@dataclass
class ProofLabel:
    kind: TheoremKind
    name: str
    statement_text: str
    statement: Formula | None = None
    completion: Completion | None = None


@dataclass
class ProofNode:
    sentence: Sentence
    post_focused: tuple[Goal, ...]
    unfocused_count: int
    produced_goal_ids: tuple[int, ...]
    closed_goal: bool
    depth: int
    target_goal_id: int | None = None
    children: list["ProofNode"] = field(default_factory=list)
    annotations: set = field(default_factory=set)


@dataclass
class ProofTree:
    label: ProofLabel
    root: ProofNode
    diagnostics: list[Diagnostic] = field(default_factory=list)


def iter_nodes(tree: ProofTree) -> Iterator[ProofNode]:
    """Pre-order traversal; yields nodes in script order."""
    stack = [tree.root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))
    return


# --- display views (what one table row shows) --------------------------------


@dataclass(frozen=True)
class HypView:
    name: str
    formula: Union[Formula, str]
    invariant_mark: bool = False


@dataclass(frozen=True)
class GoalView:
    goal_id: int
    hyps: tuple[HypView, ...]
    concl: Union[Formula, str]


@dataclass(frozen=True)
class GoalsView:
    goals: tuple[GoalView, ...]
    unfocused: int


@dataclass(frozen=True)
class HiddenGoalsView:
    count: int


StateView = Union[GoalsView, HiddenGoalsView]


@dataclass(frozen=True)
class Row:
    depth: int
    sentence_text: str
    state_view: StateView
    annotations: frozenset
    node: ProofNode


# --- tree assembly ------------------------------------------------------------


class TreeAssembler:
    """Attach nodes according to the chaining/branching discipline above."""

    def __init__(self, root: ProofNode):
        self.root = root
        self._attach = root
        self._frame_parents: list[ProofNode] = []

    def add_tactic(self, node: ProofNode) -> None:
        self._attach.children.append(node)
        self._attach = node

    def add_structural(self, node: ProofNode, result_event: str, auto_closed: int) -> None:
        for _ in range(auto_closed):
            self._frame_parents.pop()
        if result_event == "push":
            self._attach.children.append(node)
            self._frame_parents.append(self._attach)
            self._attach = node
        elif result_event == "next":
            parent = self._frame_parents[-1]
            parent.children.append(node)
            self._attach = node
        else:  # close
            self._attach.children.append(node)
            self._attach = self._frame_parents.pop()


def _node_for_tactic(
    sentence: Sentence, state: ProofState, outcome, target_id: int
) -> ProofNode:
    closed = isinstance(outcome, (Closed, ClosedAdmitted))
    produced: tuple[int, ...] = ()
    if isinstance(outcome, Subgoals) and len(outcome.goals) >= 2:
        produced = tuple(g.id for g in outcome.goals)
    return ProofNode(
        sentence=sentence,
        post_focused=state.focused,
        unfocused_count=state.unfocused_count(),
        produced_goal_ids=produced,
        closed_goal=closed,
        depth=len(state.stack) - 1,
        target_goal_id=target_id,
    )


def _node_for_structural(sentence: Sentence, res: StructResult) -> ProofNode:
    depth = len(res.state.stack) - 1
    if res.event == "close":
        depth += 1  # the token sits inside the frame it closes
    return ProofNode(
        sentence=sentence,
        post_focused=res.state.focused,
        unfocused_count=res.state.unfocused_count(),
        produced_goal_ids=(),
        closed_goal=False,
        depth=depth,
        target_goal_id=None,
    )


# --- building ------------------------------------------------------------------


def build_proof_trees(
    sentences: list[Sentence],
) -> tuple[list[ProofTree], list[Diagnostic]]:
    """Build one labelled tree per StatementHeader..ProofEnd region.

    Proofs with errors are still emitted, truncated at the failing sentence,
    with the error recorded in their diagnostics.
    """
    trees: list[ProofTree] = []
    file_diags: list[Diagnostic] = []
    i = 0
    n = len(sentences)
    while i < n:
        s = sentences[i]
        if isinstance(s.kind, StatementHeader):
            region = [s]
            i += 1
            while i < n and not isinstance(sentences[i].kind, StatementHeader):
                region.append(sentences[i])
                i += 1
                if isinstance(region[-1].kind, ProofEnd):
                    break
            trees.append(_build_one(region))
        else:
            preview = s.text if len(s.text) <= 40 else s.text[:37] + "..."
            file_diags.append(
                Diagnostic(
                    "SkippedVernacular",
                    f"not rendered: {preview}",
                    span=s.span,
                    severity=dg.NOTE,
                )
            )
            i += 1
    return trees, file_diags


def _diag_for_exception(exc: Exception, span: Span) -> Diagnostic:
    code = getattr(exc, "code", exc.__class__.__name__)
    return Diagnostic(code, str(exc), span=span, severity=dg.ERROR)


def _build_one(region: list[Sentence]) -> ProofTree:
    header = region[0]
    assert isinstance(header.kind, StatementHeader)
    label = ProofLabel(
        kind=header.kind.kind,
        name=header.kind.name,
        statement_text=header.kind.statement_text,
    )
    diags: list[Diagnostic] = []
    try:
        statement = parse_formula(header.kind.statement_text)
    except FormulaParseError as exc:
        diags.append(Diagnostic("ParseError", str(exc), span=header.span))
        root = ProofNode(
            sentence=header,
            post_focused=(),
            unfocused_count=0,
            produced_goal_ids=(),
            closed_goal=False,
            depth=0,
        )
        return ProofTree(label, root, diags)
    label.statement = statement

    gen = NameGen(start=1)
    root_goal = Goal(0, (), statement)
    state = init_state(root_goal)
    root = ProofNode(
        sentence=header,
        post_focused=state.focused,
        unfocused_count=0,
        produced_goal_ids=(0,),
        closed_goal=False,
        depth=0,
    )
    asm = TreeAssembler(root)
    saw_terminator = False

    for idx, sentence in enumerate(region[1:], start=1):
        kind = sentence.kind
        if isinstance(kind, ProofOpen):
            continue
        if isinstance(kind, OtherVernacular):
            diags.append(
                Diagnostic(
                    "SkippedVernacular",
                    "non-tactic sentence inside a proof",
                    span=sentence.span,
                    severity=dg.NOTE,
                )
            )
            continue
        if isinstance(kind, ProofEnd):
            saw_terminator = True
            try:
                label.completion = finalize(state, kind.completion)
            except ProofCheckError as exc:
                diags.append(_diag_for_exception(exc, sentence.span))
            break
        if isinstance(kind, TacticSentence):
            target = state.focused[0].id if state.focused else None
            try:
                tactic = parse_tactic(kind.body)
                state, outcome = step_tactic(state, tactic, gen)
            except (UnknownTactic, MalformedTactic, TacticFailure, ProofCheckError) as exc:
                diags.append(_diag_for_exception(exc, sentence.span))
                break
            node = _node_for_tactic(sentence, state, outcome, target)
            asm.add_tactic(node)
            continue
        if isinstance(kind, STRUCTURAL_KINDS):
            try:
                res = step_structural(state, kind, sentence_index=idx)
            except ProofCheckError as exc:
                diags.append(_diag_for_exception(exc, sentence.span))
                break
            state = res.state
            node = _node_for_structural(sentence, res)
            for code in res.warnings:
                warning = Diagnostic(
                    code, _WARNING_TEXT[code], span=sentence.span, severity=dg.WARNING
                )
                node.annotations.add(Warn(warning))
                diags.append(warning)
            asm.add_structural(node, res.event, res.auto_closed)
            continue
        raise AssertionError(f"unexpected sentence kind {kind!r}")
    if not saw_terminator and not any(d.severity == dg.ERROR for d in diags):
        diags.append(
            Diagnostic(
                "MissingTerminator",
                "proof has no Qed/Admitted/Defined",
                span=region[-1].span,
                severity=dg.ERROR,
            )
        )
    return ProofTree(label, root, diags)


_WARNING_TEXT = {
    dg.SUPERFLUOUS_BULLET: "superfluous bullet: only one goal is in focus",
    dg.SUPERFLUOUS_BRACE: "superfluous brace: a single goal is already isolated",
    dg.SUPERFLUOUS_FOCUS: "superfluous Focus: only one goal is in focus",
    dg.DEPRECATED_FOCUS: "Focus is deprecated; use bullets or braces",
}


# --- annotations (attached by the analyzer) -----------------------------------


@dataclass(frozen=True)
class InvariantHyp:
    goal_id: int
    hyp_name: str


@dataclass(frozen=True)
class HiddenInvariantHyp:
    goal_id: int
    hyp_name: str


@dataclass(frozen=True)
class HiddenCreatedGoals:
    count: int


@dataclass(frozen=True)
class Warn:
    warning: Diagnostic


# --- linearization --------------------------------------------------------------


@dataclass(frozen=True)
class RenderOptions:
    """Output behaviour switches shared by linearize and the LaTeX backend."""

    layout: str = "coqide"  # "coqide" | "sequent"
    doc_mode: str = "standalone"  # "standalone" | "fragment"
    split_mode: str = "single"  # "single" | "per-proof"
    hide_bullet_created: bool = False
    hide_invariant: bool = False
    show_warnings: bool = True
    macro_prefix: str = "psv"

    def __post_init__(self):
        if not self.macro_prefix.isalpha():
            raise ValueError("macro_prefix must match [A-Za-z]+")
        if self.layout not in ("coqide", "sequent"):
            raise ValueError(f"unknown layout {self.layout!r}")


def linearize(tree: ProofTree, opts: RenderOptions) -> list[Row]:
    """Flatten the tree into display rows, honouring the hiding options."""
    rows: list[Row] = []
    for node in iter_nodes(tree):
        hidden_k = None
        for ann in node.annotations:
            if isinstance(ann, HiddenCreatedGoals):
                hidden_k = ann.count
        if opts.hide_bullet_created and hidden_k is not None:
            view: StateView = HiddenGoalsView(hidden_k)
        else:
            hidden_pairs = {
                (a.goal_id, a.hyp_name)
                for a in node.annotations
                if isinstance(a, HiddenInvariantHyp)
            }
            marked_pairs = {
                (a.goal_id, a.hyp_name)
                for a in node.annotations
                if isinstance(a, InvariantHyp)
            }
            goal_views = []
            for goal in node.post_focused:
                hyp_views = []
                for hyp in goal.hyps:
                    key = (goal.id, hyp.name)
                    if opts.hide_invariant and key in hidden_pairs:
                        continue
                    hyp_views.append(
                        HypView(
                            hyp.name,
                            hyp.formula,
                            invariant_mark=opts.hide_invariant and key in marked_pairs,
                        )
                    )
                goal_views.append(GoalView(goal.id, tuple(hyp_views), goal.concl))
            view = GoalsView(tuple(goal_views), node.unfocused_count)
        rows.append(
            Row(
                depth=node.depth,
                sentence_text=node.sentence.text,
                state_view=view,
                annotations=frozenset(node.annotations),
                node=node,
            )
        )
    return rows
