"""Lexing of vernacular source files into classified sentences.

A sentence ends at a period followed by whitespace or end of file. Bullets
(`-`, `+`, `*`, repeated up to depth 3) and the braces `{` / `}` are
standalone tokens wherever a new sentence may begin inside a proof.
Periods inside `(* .. *)` comments (nesting respected) and inside string
literals never terminate a sentence. Comments between sentences live in the
uncovered gap text; comments inside a sentence stay in its verbatim `text`
but are stripped from the classified body.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .diagnostics import Span


class TheoremKind(enum.Enum):
    THEOREM = "Theorem"
    LEMMA = "Lemma"
    FACT = "Fact"
    EXAMPLE = "Example"
    COROLLARY = "Corollary"
    PROPOSITION = "Proposition"
    REMARK = "Remark"


class Completion(enum.Enum):
    QED = "Qed"
    ADMITTED = "Admitted"
    DEFINED = "Defined"


_HEADER_KEYWORDS = {kind.value: kind for kind in TheoremKind}
_TERMINATORS = {c.value: c for c in Completion}

MAX_BULLET_DEPTH = 3


# --- sentence kinds -------------------------------------------------------


class SentenceKind:
    __slots__ = ()


@dataclass(frozen=True)
class StatementHeader(SentenceKind):
    kind: TheoremKind
    name: str
    statement_text: str


@dataclass(frozen=True)
class ProofOpen(SentenceKind):
    pass


@dataclass(frozen=True)
class TacticSentence(SentenceKind):
    body: str


@dataclass(frozen=True)
class Bullet(SentenceKind):
    symbol: str
    depth: int


@dataclass(frozen=True)
class BraceOpen(SentenceKind):
    pass


@dataclass(frozen=True)
class BraceClose(SentenceKind):
    pass


@dataclass(frozen=True)
class FocusCmd(SentenceKind):
    n: int


@dataclass(frozen=True)
class UnfocusCmd(SentenceKind):
    pass


@dataclass(frozen=True)
class ProofEnd(SentenceKind):
    completion: Completion


@dataclass(frozen=True)
class OtherVernacular(SentenceKind):
    body: str


@dataclass(frozen=True)
class Sentence:
    """One lexed vernacular unit, with its verbatim slice of the source."""

    text: str
    span: Span
    kind: SentenceKind
    start_offset: int
    end_offset: int  # exclusive


# --- errors ----------------------------------------------------------------


class ScriptParseError(Exception):
    code = "ScriptParseError"

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class UnterminatedComment(ScriptParseError):
    code = "UnterminatedComment"


class UnterminatedString(ScriptParseError):
    code = "UnterminatedString"


class StrayClosingComment(ScriptParseError):
    code = "StrayClosingComment"


class DepthExceeded(ScriptParseError):
    code = "DepthExceeded"


class MalformedHeader(ScriptParseError):
    code = "MalformedHeader"


class BadFocusArg(ScriptParseError):
    code = "BadFocusArg"


# --- classification --------------------------------------------------------

_HEADER_RE = re.compile(
    r"^(Theorem|Lemma|Fact|Example|Corollary|Proposition|Remark)\b(.*)$", re.DOTALL
)
_HEADER_BODY_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.+)$", re.DOTALL)
_FOCUS_RE = re.compile(r"^Focus(?:\s+(\S+))?$")
_BULLET_RE = re.compile(r"^(-+|\++|\*+)$")


def classify(raw_sentence: str, in_proof: bool = True) -> SentenceKind:
    """Classify one comment-stripped sentence body (without its period).

    Raises MalformedHeader or BadFocusArg on recognizable but ill-formed
    sentences; positions refer to the start of the body.
    """
    body = raw_sentence.strip()
    m = _BULLET_RE.match(body)
    if m:
        run = m.group(1)
        if len(run) > MAX_BULLET_DEPTH:
            raise DepthExceeded(f"bullet deeper than {MAX_BULLET_DEPTH}: {run!r}", 1, 1)
        return Bullet(run[0], len(run))
    if body == "{":
        return BraceOpen()
    if body == "}":
        return BraceClose()
    m = _HEADER_RE.match(body)
    if m:
        rest = _HEADER_BODY_RE.match(m.group(2))
        if rest is None:
            raise MalformedHeader(
                f"{m.group(1)} must be followed by 'name : statement'", 1, 1
            )
        return StatementHeader(
            _HEADER_KEYWORDS[m.group(1)], rest.group(1), rest.group(2).strip()
        )
    if not in_proof:
        return OtherVernacular(body)
    if body == "Proof":
        return ProofOpen()
    if body in _TERMINATORS:
        return ProofEnd(_TERMINATORS[body])
    m = _FOCUS_RE.match(body)
    if m:
        arg = m.group(1)
        if arg is None:
            return FocusCmd(1)
        if not arg.isdigit() or int(arg) < 1:
            raise BadFocusArg(f"Focus needs a positive integer, got {arg!r}", 1, 1)
        return FocusCmd(int(arg))
    if body == "Unfocus":
        return UnfocusCmd()
    return TacticSentence(body)


# --- tokenizer --------------------------------------------------------------


class _Scanner:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.prev_line = 1
        self.prev_col = 1

    @property
    def eof(self) -> bool:
        return self.pos >= len(self.source)

    def peek(self, ahead: int = 0) -> str | None:
        idx = self.pos + ahead
        return self.source[idx] if idx < len(self.source) else None

    def advance(self) -> str:
        ch = self.source[self.pos]
        self.prev_line, self.prev_col = self.line, self.col
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def consume_comment(self) -> None:
        open_line, open_col = self.line, self.col
        self.advance()  # (
        self.advance()  # *
        depth = 1
        while depth > 0:
            if self.eof:
                raise UnterminatedComment(
                    "comment opened here is never closed", open_line, open_col
                )
            if self.peek() == "(" and self.peek(1) == "*":
                self.advance()
                self.advance()
                depth += 1
            elif self.peek() == "*" and self.peek(1) == ")":
                self.advance()
                self.advance()
                depth -= 1
            elif self.peek() == '"':
                # strings inside comments may contain *) without closing it
                self._consume_string_raw(inside_comment=(open_line, open_col))
            else:
                self.advance()

    def _consume_string_raw(self, inside_comment: tuple[int, int] | None = None) -> str:
        start_line, start_col = self.line, self.col
        chars = [self.advance()]  # opening quote
        while True:
            if self.eof:
                if inside_comment:
                    raise UnterminatedComment(
                        "comment opened here is never closed", *inside_comment
                    )
                raise UnterminatedString(
                    "string opened here is never closed", start_line, start_col
                )
            ch = self.advance()
            chars.append(ch)
            if ch == '"':
                if self.peek() == '"':  # doubled quote escapes itself
                    chars.append(self.advance())
                else:
                    return "".join(chars)

    def skip_gap(self) -> None:
        """Skip whitespace and comments between sentences."""
        while not self.eof:
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "(" and self.peek(1) == "*":
                self.consume_comment()
            else:
                return


def tokenize_sentences(source: str) -> list[Sentence]:
    """Split a vernacular source into classified sentences with exact spans."""
    sc = _Scanner(source)
    sentences: list[Sentence] = []
    in_proof = False
    while True:
        sc.skip_gap()
        if sc.eof:
            break
        start_offset, start_line, start_col = sc.pos, sc.line, sc.col
        ch = sc.peek()
        if in_proof and ch in "{}":
            sc.advance()
            kind: SentenceKind = BraceOpen() if ch == "{" else BraceClose()
            sentences.append(
                _mk(source, start_offset, start_line, start_col, sc, kind)
            )
            continue
        if in_proof and ch in "-+*":
            if ch == "*" and sc.peek(1) == ")":
                raise StrayClosingComment("no comment is open here", sc.line, sc.col)
            run = 0
            while sc.peek() == ch:
                sc.advance()
                run += 1
            if run > MAX_BULLET_DEPTH:
                raise DepthExceeded(
                    f"bullet deeper than {MAX_BULLET_DEPTH}", start_line, start_col
                )
            sentences.append(
                _mk(source, start_offset, start_line, start_col, sc, Bullet(ch, run))
            )
            continue
        body_parts: list[str] = []
        while not sc.eof:
            c = sc.peek()
            if c == '"':
                body_parts.append(sc._consume_string_raw())
            elif c == "(" and sc.peek(1) == "*":
                sc.consume_comment()
                body_parts.append(" ")  # keep token separation across the comment
            elif c == "*" and sc.peek(1) == ")":
                raise StrayClosingComment("no comment is open here", sc.line, sc.col)
            elif c == ".":
                nxt = sc.peek(1)
                if nxt is None or nxt in " \t\r\n":
                    sc.advance()
                    break
                body_parts.append(sc.advance())
            else:
                body_parts.append(sc.advance())
        body = "".join(body_parts).strip()
        kind = _classify_or_degrade(body, in_proof)
        if isinstance(kind, StatementHeader):
            in_proof = True
        elif isinstance(kind, ProofEnd):
            in_proof = False
        sentences.append(_mk(source, start_offset, start_line, start_col, sc, kind))
    return sentences


def _classify_or_degrade(body: str, in_proof: bool) -> SentenceKind:
    try:
        return classify(body, in_proof)
    except MalformedHeader:
        return OtherVernacular(body)
    except BadFocusArg:
        return TacticSentence(body)


def _mk(
    source: str,
    start_offset: int,
    start_line: int,
    start_col: int,
    sc: _Scanner,
    kind: SentenceKind,
) -> Sentence:
    return Sentence(
        text=source[start_offset : sc.pos],
        span=Span(start_line, start_col, sc.prev_line, sc.prev_col),
        kind=kind,
        start_offset=start_offset,
        end_offset=sc.pos,
    )


def reassemble(source: str, sentences: list[Sentence]) -> str:
    """Stitch covered slices and uncovered gaps back together (test oracle)."""
    pieces: list[str] = []
    cursor = 0
    for s in sentences:
        pieces.append(source[cursor : s.start_offset])
        pieces.append(source[s.start_offset : s.end_offset])
        cursor = s.end_offset
    pieces.append(source[cursor:])
    return "".join(pieces)
