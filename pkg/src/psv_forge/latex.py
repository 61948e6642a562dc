r"""LaTeX table generation for linearized proofs.

Every command emitted into table bodies is either a standard LaTeX
primitive or carries the configurable macro prefix. Prefix macros are
defined with \providecommand (lengths behind \ifdefined), so defining any
of them before \input'ing a generated file overrides the default. With the
default prefix the macro set is:

    \psvTactic{text}        tactic/command column cell
    \psvHyp{name}{formula}  one hypothesis
    \psvConcl{formula}      goal conclusion
    \psvTurnstile           sequent separator
    \psvGoalsHidden{k}      condensed "k goals" cell
    \psvInvariant           marker appended to an invariant hypothesis
    \psvWarn{text}          structuring warning
    \psvIndent              one level of bullet/brace indentation
    \psvTacticWidth, \psvStateWidth   column width lengths
    \psvTableBegin, \psvTableEnd      table environment wrappers
"""

from __future__ import annotations

import re

from .diagnostics import Diagnostic
from .forest import (
    GoalsView,
    GoalView,
    HiddenGoalsView,
    ProofLabel,
    RenderOptions,
    Row,
    StateView,
    Warn,
)
from .formula import LATEX, Formula, format_formula

_ESCAPES = {
    "#": r"\#",
    "$": r"\$",
    "%": r"\%",
    "&": r"\&",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
    "\\": r"\textbackslash{}",
}


def escape_latex(text: str) -> str:
    """Escape the nine LaTeX specials in one pass (not idempotent)."""
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def macro_defaults(prefix: str) -> str:
    p = "\\" + prefix
    lines = [
        f"% {prefix} macro defaults; define any of these before \\input to override.",
        f"\\providecommand{{{p}Tactic}}[1]{{\\texttt{{#1}}}}",
        f"\\providecommand{{{p}Hyp}}[2]{{\\ensuremath{{\\mathit{{#1}}}}\\,:\\,#2}}",
        f"\\providecommand{{{p}Concl}}[1]{{#1}}",
        f"\\providecommand{{{p}Turnstile}}{{\\ensuremath{{\\vdash}}}}",
        f"\\providecommand{{{p}GoalsHidden}}[1]"
        f"{{\\ensuremath{{\\langle #1~\\mathrm{{goals}}\\rangle}}}}",
        f"\\providecommand{{{p}Invariant}}{{\\ensuremath{{{{}}^{{\\ast}}}}}}",
        f"\\providecommand{{{p}Warn}}[1]{{{{\\footnotesize\\textit{{#1}}}}}}",
        f"\\providecommand{{{p}Indent}}{{\\hspace*{{1em}}}}",
        f"\\ifdefined{p}TacticWidth\\else\\newlength{{{p}TacticWidth}}"
        f"\\setlength{{{p}TacticWidth}}{{0.3\\linewidth}}\\fi",
        f"\\ifdefined{p}StateWidth\\else\\newlength{{{p}StateWidth}}"
        f"\\setlength{{{p}StateWidth}}{{0.65\\linewidth}}\\fi",
        f"\\providecommand{{{p}TableBegin}}{{\\begin{{longtable}}"
        f"{{@{{}}p{{{p}TacticWidth}}p{{{p}StateWidth}}@{{}}}}}}",
        f"\\providecommand{{{p}TableEnd}}{{\\end{{longtable}}}}",
    ]
    return "\n".join(lines) + "\n"


def _fmt_formula_cell(value: Formula | str) -> str:
    if isinstance(value, Formula):
        return "$" + format_formula(value, LATEX) + "$"
    return escape_latex(value)


def _render_goal_coqide(view: GoalView, header: str | None, p: str) -> str:
    parts = []
    if header:
        parts.append(f"\\textit{{{header}}}")
    for hyp in view.hyps:
        cell = f"{p}Hyp{{{escape_latex(hyp.name)}}}{{{_fmt_formula_cell(hyp.formula)}}}"
        if hyp.invariant_mark:
            cell += f"{p}Invariant"
        parts.append(cell)
    parts.append("\\hrulefill")
    parts.append(f"{p}Concl{{{_fmt_formula_cell(view.concl)}}}")
    return "\\newline ".join(parts)


def _render_goal_sequent(view: GoalView, p: str) -> str:
    hyps = []
    for hyp in view.hyps:
        cell = f"{p}Hyp{{{escape_latex(hyp.name)}}}{{{_fmt_formula_cell(hyp.formula)}}}"
        if hyp.invariant_mark:
            cell += f"{p}Invariant"
        hyps.append(cell)
    concl = _fmt_formula_cell(view.concl)
    if hyps:
        return ", ".join(hyps) + f" {p}Turnstile\\ " + concl
    return f"{p}Turnstile\\ " + concl


def _render_state(view: StateView, opts: RenderOptions) -> str:
    p = "\\" + opts.macro_prefix
    if isinstance(view, HiddenGoalsView):
        return f"{p}GoalsHidden{{{view.count}}}"
    assert isinstance(view, GoalsView)
    if not view.goals:
        if view.unfocused:
            return f"\\textit{{(no goals; {view.unfocused} unfocused)}}"
        return "\\textit{(no goals)}"
    blocks = []
    total = len(view.goals)
    for i, goal in enumerate(view.goals, start=1):
        if opts.layout == "sequent":
            blocks.append(_render_goal_sequent(goal, p))
        else:
            header = f"goal {i} of {total}" if total > 1 else None
            blocks.append(_render_goal_coqide(goal, header, p))
    return "\\newline ".join(blocks)


def render_rows(label: ProofLabel, rows: list[Row], opts: RenderOptions) -> str:
    """Emit one long-table fragment for one proof."""
    p = "\\" + opts.macro_prefix
    out = [f"{p}TableBegin"]
    completion = label.completion.value if label.completion else "incomplete"
    title = (
        f"\\multicolumn{{2}}{{@{{}}l@{{}}}}{{\\textbf{{{label.kind.value} "
        f"{escape_latex(label.name)}}}\\ \\textit{{({completion})}}}}\\\\"
    )
    out.append(title)
    for row in rows:
        tactic_cell = f"{p}Indent" * row.depth + f"{p}Tactic{{{escape_latex(row.sentence_text)}}}"
        if opts.show_warnings:
            warnings = sorted(
                (a.warning for a in row.annotations if isinstance(a, Warn)),
                key=lambda w: (w.code, w.message),
            )
            for w in warnings:
                tactic_cell += f"{p}Warn{{{escape_latex(w.message)}}}"
        state_cell = _render_state(row.state_view, opts)
        out.append(f"{tactic_cell} & {state_cell}\\\\")
    out.append(f"{p}TableEnd")
    return "\n".join(out) + "\n"


_PREAMBLE = (
    "\\documentclass{article}\n"
    "\\usepackage{longtable}\n"
    "\\begin{document}\n"
)
_POSTAMBLE = "\\end{document}\n"


def sanitize_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]", "_", name)


def render_document(
    source_name: str,
    fragments: list[tuple[ProofLabel, str]],
    opts: RenderOptions,
) -> tuple[list[tuple[str, str]], list[Diagnostic]]:
    """Assemble fragments into output files; returns (files, warnings)."""
    base = sanitize_filename(_stem(source_name))
    defaults = macro_defaults(opts.macro_prefix)
    standalone = opts.doc_mode == "standalone"
    diags: list[Diagnostic] = []

    if opts.split_mode == "single":
        body = defaults + "\n" + "\n".join(frag for _, frag in fragments)
        if standalone:
            content = _PREAMBLE + body + _POSTAMBLE
        else:
            content = body
        return [(base + ".tex", content)], diags

    files: list[tuple[str, str]] = []
    used: dict[str, int] = {}
    stems: list[str] = []
    for label, frag in fragments:
        stem = f"{base}__{sanitize_filename(label.name)}"
        if stem in used:
            used[stem] += 1
            suffixed = f"{stem}_{used[stem]}"
            diags.append(
                Diagnostic(
                    "DuplicateProofName",
                    f"proof file name collides; writing {suffixed}.tex",
                    severity="warning",
                )
            )
            stem = suffixed
        else:
            used[stem] = 1
        stems.append(stem)
        files.append((stem + ".tex", defaults + "\n" + frag))
    index_body = "".join(f"\\input{{{stem}}}\n" for stem in stems)
    if standalone:
        index = _PREAMBLE + index_body + _POSTAMBLE
    else:
        index = index_body
    files.append((f"{base}__index.tex", index))
    return files, diags


def _stem(source_name: str) -> str:
    name = source_name.replace("\\", "/").rsplit("/", 1)[-1]
    if name.endswith(".v"):
        name = name[:-2]
    return name
