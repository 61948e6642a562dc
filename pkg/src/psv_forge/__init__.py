"""psv-forge: proof-script visualisation as printable LaTeX tables."""

from .analyzer import annotate_tree, collect_warnings
from .forest import RenderOptions, build_proof_trees, linearize
from .formula import alpha_equal, format_formula, parse_formula, substitute
from .latex import escape_latex, render_document, render_rows
from .script_parser import classify, tokenize_sentences
from .tactics import apply_tactic, parse_tactic
from .trace import parse_trace, trace_from_trees, trace_to_trees

__version__ = "0.1.0"

__all__ = [
    "annotate_tree",
    "alpha_equal",
    "apply_tactic",
    "build_proof_trees",
    "classify",
    "collect_warnings",
    "escape_latex",
    "format_formula",
    "linearize",
    "parse_formula",
    "parse_tactic",
    "parse_trace",
    "render_document",
    "render_rows",
    "RenderOptions",
    "substitute",
    "tokenize_sentences",
    "trace_from_trees",
    "trace_to_trees",
    "__version__",
]
