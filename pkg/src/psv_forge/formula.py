"""First-order formula and term language.

The statement grammar, tightest binding first:

    atom      ::=  ident term*  |  term "=" term  |  "True"  |  "False"  |  "(" formula ")"
    negation  ::=  "~" negation  |  atom
    conj      ::=  negation "/\\" conj          (right associative)
    disj      ::=  conj "\\/" disj              (right associative)
    impl      ::=  disj "->" impl               (right associative)
    iff       ::=  impl "<->" iff               (right associative)
    formula   ::=  "forall" ident+ "," formula  |  "exists" ident+ "," formula  |  iff

Quantifiers may start any operand and extend maximally to the right.
Terms are first-order: a bare identifier is a variable, application heads
are constant symbols and are never substituted or bound.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
RESERVED = frozenset({"True", "False", "forall", "exists"})


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.fullmatch(text)) and text not in RESERVED


class FormulaParseError(Exception):
    """Raised on malformed formula text; carries position and expectations."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = expected
        detail = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"at offset {position}: {message}{detail}")


# --- terms ---------------------------------------------------------------


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class App(Term):
    """Application of a constant head symbol; zero args means a constant."""

    head: str
    args: tuple[Term, ...] = ()


# --- formulas ------------------------------------------------------------


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Equal(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


# --- parsing -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<op><->|->|/\\|\\/|~|=|\(|\)|,))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        self._lex()
        self.idx = 0

    def _lex(self) -> None:
        pos = 0
        text = self.text
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                at = len(text) - len(stripped)
                raise FormulaParseError(f"unexpected character {stripped[0]!r}", at)
            if m.lastgroup == "ident":
                self.tokens.append(("ident", m.group("ident"), m.start("ident")))
            else:
                self.tokens.append(("op", m.group("op"), m.start("op")))
            pos = m.end()

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.idx] if self.idx < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise FormulaParseError("unexpected end of input", len(self.text))
        self.idx += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            at = tok[2] if tok else len(self.text)
            raise FormulaParseError("unexpected token", at, expected=(op,))
        self.idx += 1

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "op" and tok[1] == op

    def at_ident(self, *names: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "ident" and (not names or tok[1] in names)

    # precedence chain, loosest first

    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        left = self.impl()
        if self.at_op("<->"):
            self.next()
            return Iff(left, self.iff())
        return left

    def impl(self) -> Formula:
        left = self.disj()
        if self.at_op("->"):
            self.next()
            return Implies(left, self.impl())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        if self.at_op("\\/"):
            self.next()
            return Or(left, self.disj())
        return left

    def conj(self) -> Formula:
        left = self.negation()
        if self.at_op("/\\"):
            self.next()
            return And(left, self.conj())
        return left

    def negation(self) -> Formula:
        if self.at_ident("forall", "exists"):
            return self.quantifier()
        if self.at_op("~"):
            self.next()
            return Not(self.negation())
        return self.atom()

    def quantifier(self) -> Formula:
        _, kw, at = self.next()
        names: list[str] = []
        while self.at_ident():
            tok = self.next()
            if tok[1] in RESERVED:
                raise FormulaParseError(f"{tok[1]!r} cannot be a binder", tok[2])
            names.append(tok[1])
        if not names:
            raise FormulaParseError("quantifier needs at least one binder", at)
        self.expect_op(",")
        body = self.formula()
        ctor = Forall if kw == "forall" else Exists
        for name in reversed(names):
            body = ctor(name, body)
        return body

    def atom(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise FormulaParseError("unexpected end of input", len(self.text))
        if tok[0] == "op" and tok[1] == "(":
            self.next()
            inner = self.formula()
            self.expect_op(")")
            if self.at_op("="):
                self.next()
                lhs = _formula_to_term(inner, tok[2])
                return Equal(lhs, self.term())
            return inner
        if tok[0] == "ident":
            if tok[1] == "True":
                self.next()
                return TrueF()
            if tok[1] == "False":
                self.next()
                return FalseF()
            if tok[1] in ("forall", "exists"):
                return self.quantifier()
            self.next()
            args: list[Term] = []
            while True:
                nxt = self.peek()
                if nxt is None:
                    break
                if nxt[0] == "ident" and nxt[1] not in RESERVED:
                    self.next()
                    args.append(Var(nxt[1]))
                elif nxt[0] == "op" and nxt[1] == "(":
                    args.append(self.paren_term())
                else:
                    break
            if self.at_op("="):
                self.next()
                lhs = App(tok[1], tuple(args)) if args else Var(tok[1])
                return Equal(lhs, self.term())
            return Atom(tok[1], tuple(args))
        raise FormulaParseError(
            f"unexpected token {tok[1]!r}", tok[2], expected=("identifier", "(")
        )

    # terms

    def term(self) -> Term:
        first = self.simple_term()
        args: list[Term] = []
        while True:
            nxt = self.peek()
            if nxt is not None and nxt[0] == "ident" and nxt[1] not in RESERVED:
                self.next()
                args.append(Var(nxt[1]))
            elif nxt is not None and nxt[0] == "op" and nxt[1] == "(":
                args.append(self.paren_term())
            else:
                break
        if not args:
            return first
        if not isinstance(first, Var):
            raise FormulaParseError(
                "application head must be a plain symbol", self._here()
            )
        return App(first.name, tuple(args))

    def simple_term(self) -> Term:
        tok = self.peek()
        if tok is not None and tok[0] == "ident" and tok[1] not in RESERVED:
            self.next()
            return Var(tok[1])
        if tok is not None and tok[0] == "op" and tok[1] == "(":
            return self.paren_term()
        at = tok[2] if tok else len(self.text)
        raise FormulaParseError("expected a term", at, expected=("identifier", "("))

    def paren_term(self) -> Term:
        self.expect_op("(")
        t = self.term()
        self.expect_op(")")
        return t

    def _here(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text)


def _formula_to_term(f: Formula, at: int) -> Term:
    if isinstance(f, Atom):
        return App(f.pred, f.args) if f.args else Var(f.pred)
    raise FormulaParseError("left side of '=' is not a term", at)


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    result = parser.formula()
    trailing = parser.peek()
    if trailing is not None:
        raise FormulaParseError(f"trailing input {trailing[1]!r}", trailing[2])
    return result


def parse_term(text: str) -> Term:
    parser = _Parser(text)
    result = parser.term()
    trailing = parser.peek()
    if trailing is not None:
        raise FormulaParseError(f"trailing input {trailing[1]!r}", trailing[2])
    return result


# --- free variables and substitution -------------------------------------


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    assert isinstance(t, App)
    out: set[str] = set()
    for arg in t.args:
        out |= term_vars(arg)
    return out


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        out: set[str] = set()
        for arg in f.args:
            out |= term_vars(arg)
        return out
    if isinstance(f, (TrueF, FalseF)):
        return set()
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or, Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Equal):
        return term_vars(f.lhs) | term_vars(f.rhs)
    assert isinstance(f, (Forall, Exists))
    return free_vars(f.body) - {f.var}


def freshen(base: str, taken: set[str]) -> str:
    """Prime-suffix freshening: append ' until the name is unused."""
    name = base
    while name in taken:
        name += "'"
    return name


def substitute_term(t: Term, name: str, replacement: Term) -> Term:
    if isinstance(t, Var):
        return replacement if t.name == name else t
    assert isinstance(t, App)
    return App(t.head, tuple(substitute_term(a, name, replacement) for a in t.args))


def substitute(f: Formula, name: str, replacement: Term) -> Formula:
    """Capture-avoiding substitution of `replacement` for free `name`."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(substitute_term(a, name, replacement) for a in f.args))
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.body, name, replacement))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(
            substitute(f.left, name, replacement),
            substitute(f.right, name, replacement),
        )
    if isinstance(f, Equal):
        return Equal(
            substitute_term(f.lhs, name, replacement),
            substitute_term(f.rhs, name, replacement),
        )
    assert isinstance(f, (Forall, Exists))
    if f.var == name or name not in free_vars(f.body):
        return f
    if f.var in term_vars(replacement):
        taken = free_vars(f.body) | term_vars(replacement) | {name}
        fresh = freshen(f.var, taken)
        body = substitute(f.body, f.var, Var(fresh))
        return type(f)(fresh, substitute(body, name, replacement))
    return type(f)(f.var, substitute(f.body, name, replacement))


# --- alpha equality -------------------------------------------------------


def alpha_equal(a: Formula, b: Formula) -> bool:
    """Equality up to consistent renaming of bound variables."""
    return _alpha(a, b, {}, {}, 0)


def _alpha_term(a: Term, b: Term, env_a: dict, env_b: dict) -> bool:
    if isinstance(a, Var) and isinstance(b, Var):
        da, db = env_a.get(a.name), env_b.get(b.name)
        if da is not None or db is not None:
            return da == db
        return a.name == b.name
    if isinstance(a, App) and isinstance(b, App):
        return (
            a.head == b.head
            and len(a.args) == len(b.args)
            and all(_alpha_term(x, y, env_a, env_b) for x, y in zip(a.args, b.args))
        )
    return False


def _alpha(a: Formula, b: Formula, env_a: dict, env_b: dict, depth: int) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Atom):
        return (
            a.pred == b.pred
            and len(a.args) == len(b.args)
            and all(_alpha_term(x, y, env_a, env_b) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, (TrueF, FalseF)):
        return True
    if isinstance(a, Not):
        return _alpha(a.body, b.body, env_a, env_b, depth)
    if isinstance(a, (And, Or, Implies, Iff)):
        return _alpha(a.left, b.left, env_a, env_b, depth) and _alpha(
            a.right, b.right, env_a, env_b, depth
        )
    if isinstance(a, Equal):
        return _alpha_term(a.lhs, b.lhs, env_a, env_b) and _alpha_term(
            a.rhs, b.rhs, env_a, env_b
        )
    assert isinstance(a, (Forall, Exists))
    ea = dict(env_a)
    eb = dict(env_b)
    ea[a.var] = depth
    eb[b.var] = depth
    return _alpha(a.body, b.body, ea, eb, depth + 1)


# --- one-way matching (used by apply) -------------------------------------


def match_formula(
    pattern: Formula, target: Formula, pattern_vars: set[str]
) -> dict[str, Term] | None:
    """Match `target` against `pattern`, instantiating `pattern_vars` with terms.

    One-way only: the target is never instantiated. Returns the substitution,
    or None if the shapes differ or a variable would escape its binder scope.
    """
    subst: dict[str, Term] = {}
    if _match(pattern, target, pattern_vars, subst, {}, {}, 0):
        return subst
    return None


def _match_term(p, t, pvars, subst, env_p, env_t) -> bool:
    if isinstance(p, Var):
        dp = env_p.get(p.name)
        if dp is not None:
            return isinstance(t, Var) and env_t.get(t.name) == dp
        if p.name in pvars:
            if term_vars(t) & env_t.keys():
                return False  # bound variable would escape
            if p.name in subst:
                return subst[p.name] == t
            subst[p.name] = t
            return True
        return isinstance(t, Var) and env_t.get(t.name) is None and t.name == p.name
    assert isinstance(p, App)
    return (
        isinstance(t, App)
        and p.head == t.head
        and len(p.args) == len(t.args)
        and all(
            _match_term(x, y, pvars, subst, env_p, env_t)
            for x, y in zip(p.args, t.args)
        )
    )


def _match(p, t, pvars, subst, env_p, env_t, depth) -> bool:
    if type(p) is not type(t):
        return False
    if isinstance(p, Atom):
        return (
            p.pred == t.pred
            and len(p.args) == len(t.args)
            and all(
                _match_term(x, y, pvars, subst, env_p, env_t)
                for x, y in zip(p.args, t.args)
            )
        )
    if isinstance(p, (TrueF, FalseF)):
        return True
    if isinstance(p, Not):
        return _match(p.body, t.body, pvars, subst, env_p, env_t, depth)
    if isinstance(p, (And, Or, Implies, Iff)):
        return _match(p.left, t.left, pvars, subst, env_p, env_t, depth) and _match(
            p.right, t.right, pvars, subst, env_p, env_t, depth
        )
    if isinstance(p, Equal):
        return _match_term(p.lhs, t.lhs, pvars, subst, env_p, env_t) and _match_term(
            p.rhs, t.rhs, pvars, subst, env_p, env_t
        )
    assert isinstance(p, (Forall, Exists))
    ep = dict(env_p)
    et = dict(env_t)
    ep[p.var] = depth
    et[t.var] = depth
    return _match(p.body, t.body, pvars, subst, ep, et, depth + 1)


# --- printing -------------------------------------------------------------

ASCII = "ascii"
LATEX = "latex"

_LEVEL_ATOM = 7
_LEVEL_NOT = 6
_LEVEL_AND = 5
_LEVEL_OR = 4
_LEVEL_IMPL = 3
_LEVEL_IFF = 2
_LEVEL_QUANT = 1

_BINOPS = {And: _LEVEL_AND, Or: _LEVEL_OR, Implies: _LEVEL_IMPL, Iff: _LEVEL_IFF}


def _level(f: Formula) -> int:
    if isinstance(f, (Atom, TrueF, FalseF, Equal)):
        return _LEVEL_ATOM
    if isinstance(f, Not):
        return _LEVEL_NOT
    for cls, level in _BINOPS.items():
        if isinstance(f, cls):
            return level
    return _LEVEL_QUANT


class _Style:
    def __init__(self, tokens: dict[str, str], latex_idents: bool):
        self.tokens = tokens
        self.latex_idents = latex_idents

    def ident(self, name: str) -> str:
        if self.latex_idents:
            return "\\mathit{%s}" % name.replace("_", "\\_")
        return name


_STYLES = {
    ASCII: _Style(
        {
            "top": "True",
            "bot": "False",
            "neg": "~",
            And: " /\\ ",
            Or: " \\/ ",
            Implies: " -> ",
            Iff: " <-> ",
            "eq": " = ",
            "forall": "forall ",
            "exists": "exists ",
            "bind_sep": " ",
            "bind_end": ", ",
            "arg_sep": " ",
        },
        latex_idents=False,
    ),
    LATEX: _Style(
        {
            "top": "\\top",
            "bot": "\\bot",
            "neg": "\\neg ",
            And: " \\wedge ",
            Or: " \\vee ",
            Implies: " \\rightarrow ",
            Iff: " \\leftrightarrow ",
            "eq": " = ",
            "forall": "\\forall ",
            "exists": "\\exists ",
            "bind_sep": "\\,",
            "bind_end": ",\\ ",
            "arg_sep": "\\,",
        },
        latex_idents=True,
    ),
}


def _fmt_term(t: Term, style: _Style) -> str:
    if isinstance(t, Var):
        return style.ident(t.name)
    assert isinstance(t, App)
    if not t.args:
        return style.ident(t.head)
    parts = [style.ident(t.head)]
    for arg in t.args:
        rendered = _fmt_term(arg, style)
        if isinstance(arg, App) and arg.args:
            rendered = "(" + rendered + ")"
        parts.append(rendered)
    return style.tokens["arg_sep"].join(parts)


def _fmt(f: Formula, style: _Style, rightmost: bool) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return style.ident(f.pred)
        parts = [style.ident(f.pred)]
        for arg in f.args:
            rendered = _fmt_term(arg, style)
            if isinstance(arg, App) and arg.args:
                rendered = "(" + rendered + ")"
            parts.append(rendered)
        return style.tokens["arg_sep"].join(parts)
    if isinstance(f, TrueF):
        return style.tokens["top"]
    if isinstance(f, FalseF):
        return style.tokens["bot"]
    if isinstance(f, Equal):
        return _fmt_term(f.lhs, style) + style.tokens["eq"] + _fmt_term(f.rhs, style)
    if isinstance(f, Not):
        body = f.body
        if _level(body) == _LEVEL_QUANT:
            if rightmost:
                return style.tokens["neg"] + _fmt(body, style, True)
            return style.tokens["neg"] + "(" + _fmt(body, style, True) + ")"
        if _level(body) < _LEVEL_NOT:
            return style.tokens["neg"] + "(" + _fmt(body, style, True) + ")"
        return style.tokens["neg"] + _fmt(body, style, rightmost)
    for cls, level in _BINOPS.items():
        if isinstance(f, cls):
            left, right = f.left, f.right
            if _level(left) <= level:
                left_s = "(" + _fmt(left, style, True) + ")"
            else:
                left_s = _fmt(left, style, False)
            if _level(right) == _LEVEL_QUANT:
                if rightmost:
                    right_s = _fmt(right, style, True)
                else:
                    right_s = "(" + _fmt(right, style, True) + ")"
            elif _level(right) < level:
                right_s = "(" + _fmt(right, style, True) + ")"
            else:
                right_s = _fmt(right, style, rightmost)
            return left_s + style.tokens[cls] + right_s
    assert isinstance(f, (Forall, Exists))
    kind = type(f)
    names = [f.var]
    body = f.body
    while isinstance(body, kind):
        names.append(body.var)
        body = body.body
    kw = style.tokens["forall" if kind is Forall else "exists"]
    binders = style.tokens["bind_sep"].join(style.ident(n) for n in names)
    return kw + binders + style.tokens["bind_end"] + _fmt(body, style, True)


def format_formula(f: Formula, style: str = ASCII) -> str:
    """Render with minimal parentheses; ascii output reparses to the input."""
    return _fmt(f, _STYLES[style], rightmost=True)
