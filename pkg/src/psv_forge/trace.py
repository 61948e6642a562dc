"""Ingestion of externally captured proof-state traces.

Trace JSON schema, version 1:

    {"psv_trace_version": 1,
     "source_file": str,
     "proofs": [{"kind": str, "name": str, "statement": str,
                 "completion": "Qed" | "Admitted" | "Defined",
                 "steps": [{"sentence": str,
                            "goals": [{"hyps": [{"name": str, "type": str}],
                                       "concl": str}]}]}]}

The first step carries the statement sentence and the initial proof state;
later steps carry the proof body with the goals visible after each step.
Structural sentences (bullets, braces, Focus) replay through the same focus
engine as kernel mode, so depths and warnings agree; goal contents are taken
verbatim from the trace. Formula strings that happen to parse in the
statement grammar are rendered as formulas (this is what makes kernel mode
and a kernel-generated trace render byte-identically); anything else stays
an opaque string.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import diagnostics as dg
from .diagnostics import Diagnostic, Span
from .focus import ProofState, Frame, ROOT, step_structural
from .forest import (
    ProofLabel,
    ProofNode,
    ProofTree,
    TreeAssembler,
    Warn,
    _node_for_structural,
    iter_nodes,
)
from .formula import Formula, FormulaParseError, format_formula, parse_formula
from .script_parser import (
    Bullet,
    BraceClose,
    BraceOpen,
    Completion,
    FocusCmd,
    ProofEnd,
    ProofOpen,
    Sentence,
    StatementHeader,
    TacticSentence,
    TheoremKind,
    UnfocusCmd,
    classify,
)
from .tactics import Goal, Hypothesis, NameGen

TRACE_VERSION = 1

_STRUCTURAL = (Bullet, BraceOpen, BraceClose, FocusCmd, UnfocusCmd)


class SchemaError(Exception):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"at {path}: {message}")


class VersionMismatch(Exception):
    def __init__(self, found):
        self.found = found
        super().__init__(f"unsupported psv_trace_version {found!r} (expected {TRACE_VERSION})")


# --- document types ----------------------------------------------------------


@dataclass(frozen=True)
class TraceHyp:
    name: str
    type_text: str


@dataclass(frozen=True)
class TraceGoal:
    hyps: tuple[TraceHyp, ...]
    concl_text: str


@dataclass(frozen=True)
class TraceStep:
    sentence_text: str
    goals: tuple[TraceGoal, ...]


@dataclass(frozen=True)
class TraceProof:
    kind: str
    name: str
    statement_text: str
    completion: str
    steps: tuple[TraceStep, ...]


@dataclass(frozen=True)
class TraceDocument:
    source_file: str
    proofs: tuple[TraceProof, ...]


# --- parsing / serialization ---------------------------------------------------


def _want(obj, key, typ, path):
    if not isinstance(obj, dict):
        raise SchemaError(path or "/", "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}/{key}", "missing required field")
    value = obj[key]
    if not isinstance(value, typ):
        raise SchemaError(f"{path}/{key}", f"expected {typ.__name__}")
    return value


def parse_trace(data: bytes | str) -> TraceDocument:
    """Validate and load a trace JSON document."""
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("/", "expected a JSON object")
    if "psv_trace_version" not in obj:
        raise SchemaError("/psv_trace_version", "missing required field")
    if obj["psv_trace_version"] != TRACE_VERSION:
        raise VersionMismatch(obj["psv_trace_version"])
    source_file = _want(obj, "source_file", str, "")
    proofs_raw = _want(obj, "proofs", list, "")
    proofs = []
    for i, praw in enumerate(proofs_raw):
        ppath = f"/proofs/{i}"
        kind = _want(praw, "kind", str, ppath)
        name = _want(praw, "name", str, ppath)
        if not name:
            raise SchemaError(f"{ppath}/name", "must be non-empty")
        statement = _want(praw, "statement", str, ppath)
        completion = _want(praw, "completion", str, ppath)
        if completion not in ("Qed", "Admitted", "Defined"):
            raise SchemaError(f"{ppath}/completion", "must be Qed, Admitted or Defined")
        steps_raw = _want(praw, "steps", list, ppath)
        if not steps_raw:
            raise SchemaError(f"{ppath}/steps", "must be non-empty")
        steps = []
        for j, sraw in enumerate(steps_raw):
            spath = f"{ppath}/steps/{j}"
            sentence = _want(sraw, "sentence", str, spath)
            goals_raw = _want(sraw, "goals", list, spath)
            goals = []
            for k, graw in enumerate(goals_raw):
                gpath = f"{spath}/goals/{k}"
                hyps_raw = _want(graw, "hyps", list, gpath)
                concl = _want(graw, "concl", str, gpath)
                hyps = []
                for m, hraw in enumerate(hyps_raw):
                    hpath = f"{gpath}/hyps/{m}"
                    hname = _want(hraw, "name", str, hpath)
                    if not hname:
                        raise SchemaError(f"{hpath}/name", "must be non-empty")
                    htype = _want(hraw, "type", str, hpath)
                    hyps.append(TraceHyp(hname, htype))
                goals.append(TraceGoal(tuple(hyps), concl))
            steps.append(TraceStep(sentence, tuple(goals)))
        proofs.append(TraceProof(kind, name, statement, completion, tuple(steps)))
    return TraceDocument(source_file, tuple(proofs))


def serialize_trace(doc: TraceDocument) -> dict:
    return {
        "psv_trace_version": TRACE_VERSION,
        "source_file": doc.source_file,
        "proofs": [
            {
                "kind": p.kind,
                "name": p.name,
                "statement": p.statement_text,
                "completion": p.completion,
                "steps": [
                    {
                        "sentence": s.sentence_text,
                        "goals": [
                            {
                                "hyps": [
                                    {"name": h.name, "type": h.type_text}
                                    for h in g.hyps
                                ],
                                "concl": g.concl_text,
                            }
                            for g in s.goals
                        ],
                    }
                    for s in p.steps
                ],
            }
            for p in doc.proofs
        ],
    }


# --- trace -> trees --------------------------------------------------------------


_KIND_NAMES = {k.value: k for k in TheoremKind}


def _opaque_or_formula(text: str, cache: dict) -> Formula | str:
    if text not in cache:
        try:
            cache[text] = parse_formula(text)
        except FormulaParseError:
            cache[text] = text
    return cache[text]


def _goal_content(traced: TraceGoal, gid: int, cache: dict) -> Goal:
    hyps = tuple(
        Hypothesis(h.name, _opaque_or_formula(h.type_text, cache)) for h in traced.hyps
    )
    return Goal(gid, hyps, _opaque_or_formula(traced.concl_text, cache))


def _span_for_step(idx: int) -> Span:
    return Span(idx + 1, 1, idx + 1, 1)


def trace_to_trees(doc: TraceDocument) -> list[ProofTree]:
    """Build one proof tree per traced proof; structure violations downgrade
    to InconsistentTrace diagnostics and the tree is still emitted."""
    return [_trace_tree(p) for p in doc.proofs]


def _strip_period(sentence: str) -> str:
    text = sentence.strip()
    return text[:-1] if text.endswith(".") else text


def _trace_tree(proof: TraceProof) -> ProofTree:
    diags: list[Diagnostic] = []
    kind = _KIND_NAMES.get(proof.kind)
    if kind is None:
        diags.append(
            Diagnostic(
                "InconsistentTrace",
                f"unknown statement kind {proof.kind!r}; treating as Theorem",
                severity=dg.WARNING,
            )
        )
        kind = TheoremKind.THEOREM
    label = ProofLabel(
        kind=kind,
        name=proof.name,
        statement_text=proof.statement_text,
        completion=Completion(proof.completion),
    )
    cache: dict = {}
    statement = _opaque_or_formula(proof.statement_text, cache)
    if isinstance(statement, Formula):
        label.statement = statement

    first = proof.steps[0]
    focused = tuple(
        _goal_content(g, i, cache) for i, g in enumerate(first.goals)
    )
    gen = NameGen(start=len(first.goals))
    state = ProofState(focused=focused, stack=(Frame(ROOT),))
    root_sentence = _sentence_like(first.sentence_text, 0)
    root = ProofNode(
        sentence=root_sentence,
        post_focused=state.focused,
        unfocused_count=0,
        produced_goal_ids=tuple(g.id for g in state.focused),
        closed_goal=False,
        depth=0,
    )
    asm = TreeAssembler(root)

    for idx, step in enumerate(proof.steps[1:], start=1):
        body = _strip_period(step.sentence_text)
        try:
            kind_obj = classify(body, in_proof=True)
        except Exception:
            kind_obj = None
        if isinstance(kind_obj, (ProofOpen, ProofEnd, StatementHeader)):
            continue
        sentence = _sentence_like(step.sentence_text, idx, kind_obj)
        if isinstance(kind_obj, _STRUCTURAL):
            try:
                res = step_structural(state, kind_obj, sentence_index=idx)
            except Exception as exc:
                diags.append(
                    Diagnostic(
                        "InconsistentTrace",
                        f"structural rule violated at step {idx}: {exc}",
                        span=_span_for_step(idx),
                        severity=dg.WARNING,
                    )
                )
                state = _resync(state, step, gen, cache)
                node = ProofNode(
                    sentence=sentence,
                    post_focused=state.focused,
                    unfocused_count=state.unfocused_count(),
                    produced_goal_ids=(),
                    closed_goal=False,
                    depth=len(state.stack) - 1,
                )
                asm.add_tactic(node)
                continue
            state = res.state
            if len(state.focused) != len(step.goals):
                diags.append(_count_mismatch(idx, len(state.focused), len(step.goals)))
                state = _resync(state, step, gen, cache)
            else:
                state = _overwrite_focused(state, step, cache)
            node = _node_for_structural(sentence, res)
            node = _refresh_node(node, state)
            for code in res.warnings:
                warning = Diagnostic(
                    code,
                    _trace_warning_text(code),
                    span=_span_for_step(idx),
                    severity=dg.WARNING,
                )
                node.annotations.add(Warn(warning))
                diags.append(warning)
            asm.add_structural(node, res.event, res.auto_closed)
            continue
        # tactic-like step: derive the outcome from the goal-count delta
        n = len(state.focused)
        m = len(step.goals)
        closed = False
        produced: tuple[int, ...] = ()
        target = state.focused[0].id if state.focused else None
        if n == 0 or m < n - 1:
            diags.append(_count_mismatch(idx, n, m))
            state = _resync(state, step, gen, cache)
        elif m == n - 1:
            closed = True
            state = ProofState(
                focused=state.focused[1:],
                stack=state.stack,
                admitted_any=state.admitted_any,
                step_index=state.step_index + 1,
            )
            state = _overwrite_focused(state, step, cache)
        else:
            k = m - n + 1
            new_ids = [state.focused[0].id] + [gen.next_goal_id() for _ in range(k - 1)]
            if k >= 2:
                produced = tuple(new_ids)
            placeholders = tuple(
                Goal(gid, (), "") for gid in new_ids
            ) + state.focused[1:]
            state = ProofState(
                focused=placeholders,
                stack=state.stack,
                admitted_any=state.admitted_any,
                step_index=state.step_index + 1,
            )
            state = _overwrite_focused(state, step, cache)
        node = ProofNode(
            sentence=sentence,
            post_focused=state.focused,
            unfocused_count=state.unfocused_count(),
            produced_goal_ids=produced,
            closed_goal=closed,
            depth=len(state.stack) - 1,
            target_goal_id=target,
        )
        asm.add_tactic(node)
    return ProofTree(label, root, diags)


def _count_mismatch(idx: int, simulated: int, traced: int) -> Diagnostic:
    return Diagnostic(
        "InconsistentTrace",
        f"step {idx}: simulation has {simulated} focused goal(s), trace reports {traced}",
        span=_span_for_step(idx),
        severity=dg.WARNING,
    )


def _overwrite_focused(state: ProofState, step: TraceStep, cache: dict) -> ProofState:
    focused = tuple(
        _goal_content(traced, goal.id, cache)
        for goal, traced in zip(state.focused, step.goals)
    )
    return ProofState(
        focused=focused,
        stack=state.stack,
        admitted_any=state.admitted_any,
        step_index=state.step_index,
    )


def _resync(state: ProofState, step: TraceStep, gen: NameGen, cache: dict) -> ProofState:
    focused = tuple(
        _goal_content(g, gen.next_goal_id(), cache) for g in step.goals
    )
    return ProofState(
        focused=focused,
        stack=state.stack,
        admitted_any=state.admitted_any,
        step_index=state.step_index + 1,
    )


def _refresh_node(node: ProofNode, state: ProofState) -> ProofNode:
    node.post_focused = state.focused
    node.unfocused_count = state.unfocused_count()
    return node


def _trace_warning_text(code: str) -> str:
    from .forest import _WARNING_TEXT

    return _WARNING_TEXT[code]


def _sentence_like(text: str, idx: int, kind=None) -> Sentence:
    """Synthesize a Sentence for one trace step (spans are step-numbered)."""
    if kind is None:
        try:
            kind = classify(_strip_period(text), in_proof=True)
        except Exception:
            kind = TacticSentence(_strip_period(text))
    return Sentence(
        text=text,
        span=_span_for_step(idx),
        kind=kind,
        start_offset=0,
        end_offset=0,
    )


# --- kernel -> trace export -------------------------------------------------------


def _text_of(value: Formula | str) -> str:
    if isinstance(value, Formula):
        return format_formula(value)
    return value


def trace_from_trees(trees: list[ProofTree], source_file: str) -> dict:
    """Export kernel-built trees as a version-1 trace document (dict form).

    Only proofs with a recorded completion are exported; replaying the result
    through `trace_to_trees` renders byte-identically to kernel mode.
    """
    proofs = []
    for tree in trees:
        if tree.label.completion is None:
            continue
        steps = []
        for node in iter_nodes(tree):
            goals = [
                {
                    "hyps": [
                        {"name": h.name, "type": _text_of(h.formula)} for h in g.hyps
                    ],
                    "concl": _text_of(g.concl),
                }
                for g in node.post_focused
            ]
            steps.append({"sentence": node.sentence.text, "goals": goals})
        proofs.append(
            {
                "kind": tree.label.kind.value,
                "name": tree.label.name,
                "statement": tree.label.statement_text,
                "completion": tree.label.completion.value,
                "steps": steps,
            }
        )
    return {
        "psv_trace_version": TRACE_VERSION,
        "source_file": source_file,
        "proofs": proofs,
    }
