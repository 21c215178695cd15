"""Propositional object language: named atoms, absurdity, and &, |, ->.

Negation is never a primitive node; ~A abbreviates A -> bot everywhere,
both in values and in the concrete syntax.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = [
    "FormulaError",
    "Atom",
    "BOT",
    "Conj",
    "Disj",
    "Impl",
    "FVar",
    "Formula",
    "negation",
    "atoms_of",
    "parse_formula",
    "render_formula",
]

_NAME_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_BOT_NAME = "_|_"
# words that lex as the absurdity constant, never as atom names
_BOT_WORDS = {"bot"}


class FormulaError(ValueError):
    """Malformed formula text or construction."""


@dataclass(frozen=True)
class Atom:
    name: str

    def __post_init__(self):
        if self.name == _BOT_NAME:
            return
        if self.name in _BOT_WORDS or not _NAME_RE.match(self.name):
            raise FormulaError(f"bad atom name {self.name!r}")

    @property
    def is_bottom(self) -> bool:
        return self.name == _BOT_NAME

    def __str__(self) -> str:
        return render_formula(self)


BOT = Atom(_BOT_NAME)


@dataclass(frozen=True)
class Conj:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Disj:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Impl:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class FVar:
    """Formula metavariable; appears only inside rewrite patterns."""

    name: str

    def __str__(self) -> str:
        return "?" + self.name


Formula = Atom | Conj | Disj | Impl


def negation(f: Formula) -> Impl:
    return Impl(f, BOT)


def atoms_of(f: Formula) -> frozenset[Atom]:
    match f:
        case Atom():
            return frozenset([f])
        case FVar():
            return frozenset()
        case Conj(l, r) | Disj(l, r) | Impl(l, r):
            return atoms_of(l) | atoms_of(r)
    raise FormulaError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# concrete syntax
#
# precedence: ~ binds tightest, then &, then |, then ->;
# -> associates right, & and | associate left.

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<bot>_\|_|⊥|bot\b)
      | (?P<name>[a-z][a-zA-Z0-9_]*)
      | (?P<meta>\?[A-Za-z][A-Za-z0-9_]*)
      | (?P<imp>->)
      | (?P<and>&)
      | (?P<or>\|)
      | (?P<not>~)
      | (?P<lp>\()
      | (?P<rp>\))
    """,
    re.VERBOSE,
)


def _tokenize(text: str, metavars: bool):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaError(f"syntax error at column {pos + 1}: unexpected {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            if kind == "meta" and not metavars:
                raise FormulaError(f"syntax error at column {pos + 1}: metavariable not allowed here")
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", pos))
    return out


class _Parser:
    def __init__(self, tokens, text):
        self.toks = tokens
        self.text = text
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, want):
        kind, val, pos = self.peek()
        got = "end of input" if kind == "eof" else repr(val)
        raise FormulaError(f"syntax error at column {pos + 1}: expected {want}, got {got}")

    def formula(self):
        left = self.disj()
        if self.peek()[0] == "imp":
            self.take()
            return Impl(left, self.formula())
        return left

    def disj(self):
        f = self.conj()
        while self.peek()[0] == "or":
            self.take()
            f = Disj(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek()[0] == "and":
            self.take()
            f = Conj(f, self.unary())
        return f

    def unary(self):
        kind, val, _pos = self.peek()
        if kind == "not":
            self.take()
            return Impl(self.unary(), BOT)
        if kind == "bot":
            self.take()
            return BOT
        if kind == "name":
            self.take()
            return Atom(val)
        if kind == "meta":
            self.take()
            return FVar(val[1:])
        if kind == "lp":
            self.take()
            f = self.formula()
            if self.peek()[0] != "rp":
                self.fail("')'")
            self.take()
            return f
        self.fail("a formula")


def parse_formula(text: str, *, metavars: bool = False) -> Formula:
    """Parse concrete syntax; with metavars=True, ?X tokens become FVar."""
    p = _Parser(_tokenize(text, metavars), text)
    f = p.formula()
    if p.peek()[0] != "eof":
        p.fail("end of input")
    return f


_PREC_IMP, _PREC_OR, _PREC_AND, _PREC_NOT = 1, 2, 3, 4


def _render(f, prec: int) -> str:
    match f:
        case Atom(name):
            return name
        case FVar(name):
            return "?" + name
        case Impl(l, r) if r == BOT:
            s = "~" + _render(l, _PREC_NOT)
            return s  # prefix ~ never needs outer parens
        case Conj(l, r):
            s = _render(l, _PREC_AND) + " & " + _render(r, _PREC_AND + 1)
            return "(" + s + ")" if prec > _PREC_AND else s
        case Disj(l, r):
            s = _render(l, _PREC_OR) + " | " + _render(r, _PREC_OR + 1)
            return "(" + s + ")" if prec > _PREC_OR else s
        case Impl(l, r):
            s = _render(l, _PREC_IMP + 1) + " -> " + _render(r, _PREC_IMP)
            return "(" + s + ")" if prec > _PREC_IMP else s
    raise FormulaError(f"not a formula: {f!r}")


def render_formula(f: Formula) -> str:
    """Canonical text; parse_formula(render_formula(f)) == f."""
    return _render(f, 0)
