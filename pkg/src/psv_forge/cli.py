"""Command-line entry point.

Exit codes: 0 success (warnings allowed unless --fail-on-warning),
1 any proof-level error, 2 usage / I/O / trace-schema error. Outputs are
written atomically (temp file + rename) and two runs over identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import analyzer, diagnostics as dg, forest, latex, trace
from .diagnostics import Diagnostic
from .forest import RenderOptions
from .script_parser import ScriptParseError, tokenize_sentences


@dataclass
class RunConfig:
    inputs: list[Path]
    project_mode: bool = False
    trace_path: Path | None = None
    render: RenderOptions = field(default_factory=RenderOptions)
    out_dir: Path = Path("./psv-out")
    fail_on_warning: bool = False


class UsageError(Exception):
    pass


def _build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="psv-forge",
        description="Render Coq-style proof scripts as LaTeX tables with "
        "the full proof state at every step.",
    )
    ap.add_argument("inputs", nargs="*", help="vernacular .v files (or a project directory)")
    ap.add_argument("--layout", choices=["coqide", "sequent"], default="coqide")
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument(
        "--standalone", dest="doc_mode", action="store_const", const="standalone",
        help="emit complete compilable documents (default)",
    )
    mode.add_argument(
        "--fragment", dest="doc_mode", action="store_const", const="fragment",
        help="emit only the LaTeX tables",
    )
    ap.set_defaults(doc_mode="standalone")
    ap.add_argument("--split", choices=["single", "per-proof"], default="single")
    ap.add_argument("--hide-bullet-created", action="store_true")
    ap.add_argument("--hide-invariant", action="store_true")
    ap.add_argument("--no-warnings", action="store_true")
    ap.add_argument("--macro-prefix", metavar="NAME", default="psv")
    ap.add_argument("--trace", metavar="FILE.json", default=None)
    ap.add_argument("--project", action="store_true",
                    help="treat inputs as project directories; process every .v inside")
    ap.add_argument("-o", "--out", metavar="DIR", default="./psv-out")
    ap.add_argument("--fail-on-warning", action="store_true")
    return ap


def parse_args(argv: list[str]) -> RunConfig:
    ap = _build_arg_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        raise UsageError(f"bad command line (argparse exit {exc.code})") from exc
    if not ns.macro_prefix.isalpha():
        raise UsageError("--macro-prefix must consist of letters only")
    if ns.trace and ns.inputs:
        raise UsageError("give either vernacular inputs or --trace, not both")
    if not ns.trace and not ns.inputs:
        raise UsageError("no inputs given")
    render = RenderOptions(
        layout=ns.layout,
        doc_mode=ns.doc_mode,
        split_mode=ns.split,
        hide_bullet_created=ns.hide_bullet_created,
        hide_invariant=ns.hide_invariant,
        show_warnings=not ns.no_warnings,
        macro_prefix=ns.macro_prefix,
    )
    return RunConfig(
        inputs=[Path(p) for p in ns.inputs],
        project_mode=ns.project,
        trace_path=Path(ns.trace) if ns.trace else None,
        render=render,
        out_dir=Path(ns.out),
        fail_on_warning=ns.fail_on_warning,
    )


def discover_project(directory: Path) -> list[Path]:
    """All .v files under `directory`, sorted; symlink cycles are visited once."""
    if not directory.is_dir():
        raise NotADirectoryError(str(directory))
    found: set[Path] = set()
    visited_dirs: set[str] = set()

    def walk(d: Path) -> None:
        real = os.path.realpath(d)
        if real in visited_dirs:
            return
        visited_dirs.add(real)
        try:
            entries = sorted(os.listdir(d))
        except OSError:
            return
        for entry in entries:
            path = d / entry
            if path.is_dir():
                walk(path)
            elif path.is_file() and entry.endswith(".v"):
                found.add(path)

    walk(directory)
    return sorted(found, key=lambda p: p.as_posix())


def process_source(text: str, source_name: str, opts: RenderOptions):
    """Full kernel pipeline for one vernacular source."""
    sentences = tokenize_sentences(text)
    trees, diags = forest.build_proof_trees(sentences)
    for tree in trees:
        analyzer.annotate_tree(tree)
        diags.extend(tree.diagnostics)
    fragments = [
        (t.label, latex.render_rows(t.label, forest.linearize(t, opts), opts))
        for t in trees
    ]
    files, render_diags = latex.render_document(source_name, fragments, opts)
    diags.extend(render_diags)
    return files, diags


def process_trace_document(doc: trace.TraceDocument, opts: RenderOptions):
    trees = trace.trace_to_trees(doc)
    diags: list[Diagnostic] = []
    for tree in trees:
        analyzer.annotate_tree(tree)
        diags.extend(tree.diagnostics)
    fragments = [
        (t.label, latex.render_rows(t.label, forest.linearize(t, opts), opts))
        for t in trees
    ]
    files, render_diags = latex.render_document(doc.source_file, fragments, opts)
    diags.extend(render_diags)
    return files, diags


def _write_atomic(out_dir: Path, filename: str, content: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, out_dir / filename)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit_diagnostics(source_name: str, diags: list[Diagnostic], stream) -> None:
    for d in diags:
        print(d.format(source_name), file=stream)


def run(argv: list[str], stderr=None) -> int:
    stderr = stderr if stderr is not None else sys.stderr
    try:
        config = parse_args(argv)
    except UsageError as exc:
        print(f"psv-forge: error: {exc}", file=stderr)
        return 2

    saw_error = False
    saw_warning = False

    try:
        if config.trace_path is not None:
            jobs = [("trace", config.trace_path)]
        elif config.project_mode:
            jobs = []
            for directory in config.inputs:
                for path in discover_project(directory):
                    jobs.append(("source", path))
        else:
            jobs = [("source", p) for p in config.inputs]
    except NotADirectoryError as exc:
        print(f"psv-forge: error: not a directory: {exc}", file=stderr)
        return 2

    used_names: dict[str, int] = {}
    for job_kind, path in jobs:
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"psv-forge: error: cannot read {path}: {exc}", file=stderr)
            return 2
        if job_kind == "trace":
            try:
                doc = trace.parse_trace(raw)
            except (trace.SchemaError, trace.VersionMismatch) as exc:
                print(f"psv-forge: error: {path}: {exc}", file=stderr)
                return 2
            files, diags = process_trace_document(doc, config.render)
            display_name = doc.source_file or str(path)
        else:
            try:
                files, diags = process_source(raw, path.name, config.render)
            except ScriptParseError as exc:
                diag = Diagnostic(exc.code, str(exc), span=None)
                _emit_diagnostics(str(path), [diag], stderr)
                saw_error = True
                continue
            display_name = str(path)
        _emit_diagnostics(display_name, diags, stderr)
        saw_error = saw_error or any(d.severity == dg.ERROR for d in diags)
        saw_warning = saw_warning or any(d.severity == dg.WARNING for d in diags)
        for filename, content in files:
            # distinct inputs with the same basename must not clobber each other
            if filename in used_names:
                used_names[filename] += 1
                stem, dot, ext = filename.rpartition(".")
                filename = f"{stem}_{used_names[filename]}{dot}{ext}"
            else:
                used_names[filename] = 1
            _write_atomic(config.out_dir, filename, content)

    if saw_error:
        return 1
    if saw_warning and config.fail_on_warning:
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
