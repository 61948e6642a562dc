"""Analyses over built proof trees.

All three analyses are pure functions of the tree; `annotate_tree` runs them
and attaches the results to the nodes so the renderer can act on them.

A hypothesis is invariant when, from the row that introduces it, every later
snapshot of its goal and of every goal descended from it still contains a
hypothesis with the same name and an alpha-equal formula, until each such
lineage closes. Renaming or destructing it breaks invariance; `move` does
not. In trace mode formulas are opaque strings and string equality stands in
for alpha-equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .forest import (
    HiddenCreatedGoals,
    HiddenInvariantHyp,
    InvariantHyp,
    ProofNode,
    ProofTree,
    Warn,
    iter_nodes,
)
from .formula import Formula, alpha_equal
from .script_parser import Bullet, BraceOpen, FocusCmd


def formulas_match(a, b) -> bool:
    if isinstance(a, Formula) and isinstance(b, Formula):
        return alpha_equal(a, b)
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    return False


@dataclass
class _HypRecord:
    intro_idx: int
    intro_goal: int
    name: str
    formula: object
    broken: bool = False
    sightings: list[tuple[int, int]] = field(default_factory=list)  # (row, goal)


def detect_invariants(tree: ProofTree) -> list[tuple[ProofNode, object]]:
    """Find invariant hypotheses; returns (node, annotation) pairs."""
    rows = list(iter_nodes(tree))
    live: dict[int, dict[str, _HypRecord]] = {}
    records: list[_HypRecord] = []

    for idx, node in enumerate(rows):
        if idx == 0:
            for goal in node.post_focused:
                live[goal.id] = {
                    h.name: _new_record(records, idx, goal.id, h) for h in goal.hyps
                }
        elif node.target_goal_id is not None:
            target = node.target_goal_id
            old = live.pop(target, {})
            if not node.closed_goal:
                subgoal_ids = (
                    list(node.produced_goal_ids) if node.produced_goal_ids else [target]
                )
                carried: dict[int, int] = {}
                for sid in subgoal_ids:
                    goal = _goal_by_id(node, sid)
                    if goal is None:
                        continue
                    current: dict[str, _HypRecord] = {}
                    for h in goal.hyps:
                        rec = old.get(h.name)
                        if (
                            rec is not None
                            and not rec.broken
                            and formulas_match(rec.formula, h.formula)
                        ):
                            current[h.name] = rec
                            carried[id(rec)] = carried.get(id(rec), 0) + 1
                        else:
                            current[h.name] = _new_record(records, idx, sid, h)
                    live[sid] = current
                for rec in old.values():
                    if carried.get(id(rec), 0) < len(subgoal_ids):
                        rec.broken = True
        # Every row: record sightings of live hypotheses in displayed goals.
        for goal in node.post_focused:
            table = live.get(goal.id)
            if not table:
                continue
            for h in goal.hyps:
                rec = table.get(h.name)
                if rec is not None and not rec.broken and rec.intro_idx < idx:
                    rec.sightings.append((idx, goal.id))

    out: list[tuple[ProofNode, object]] = []
    for rec in records:
        if rec.broken:
            continue
        out.append((rows[rec.intro_idx], InvariantHyp(rec.intro_goal, rec.name)))
        for row_idx, goal_id in rec.sightings:
            out.append((rows[row_idx], HiddenInvariantHyp(goal_id, rec.name)))
    return out


def _new_record(records, idx, goal_id, hyp) -> _HypRecord:
    rec = _HypRecord(idx, goal_id, hyp.name, hyp.formula)
    records.append(rec)
    return rec


def _goal_by_id(node: ProofNode, goal_id: int):
    for goal in node.post_focused:
        if goal.id == goal_id:
            return goal
    return None


def detect_bullet_handled(tree: ProofTree) -> list[tuple[ProofNode, object]]:
    """Mark nodes whose created goals are all focused next by a bullet/brace."""
    rows = list(iter_nodes(tree))
    out: list[tuple[ProofNode, object]] = []
    for idx, node in enumerate(rows):
        produced = node.produced_goal_ids
        if len(produced) < 2:
            continue
        if all(_next_touch_is_focusing(rows, idx, gid) for gid in produced):
            out.append((node, HiddenCreatedGoals(len(produced))))
    return out


def _next_touch_is_focusing(rows: list[ProofNode], start: int, goal_id: int) -> bool:
    for later in rows[start + 1 :]:
        if later.target_goal_id == goal_id:
            return False  # a tactic hit it while unfocused
        kind = later.sentence.kind
        if isinstance(kind, (Bullet, BraceOpen)):
            if later.post_focused and later.post_focused[0].id == goal_id:
                return True
        elif isinstance(kind, FocusCmd):
            if later.post_focused and later.post_focused[0].id == goal_id:
                return False  # Focus does not count as bullet handling
    return False


def collect_warnings(tree: ProofTree) -> list[Diagnostic]:
    """Structural warnings of the whole tree, deduplicated and span-sorted."""
    seen: dict[tuple, Diagnostic] = {}
    for node in iter_nodes(tree):
        for ann in node.annotations:
            if isinstance(ann, Warn):
                w = ann.warning
                seen.setdefault((w.code, w.span), w)
    for diag in tree.diagnostics:
        if diag.severity == dg.WARNING and diag.code in dg.WARNING_CODES:
            seen.setdefault((diag.code, diag.span), diag)
    return sorted(seen.values(), key=lambda w: (w.span or (0, 0, 0, 0), w.code))


def annotate_tree(tree: ProofTree) -> ProofTree:
    """Run every analysis and attach the annotations to the nodes."""
    for node, ann in detect_invariants(tree):
        node.annotations.add(ann)
    for node, ann in detect_bullet_handled(tree):
        node.annotations.add(ann)
    return tree
