"""Tiny s-expression reader shared by the structure and rule syntaxes.

Quoted strings come back as plain str, integers as int, everything else
as Sym; lists nest. Positions are tracked for error messages.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["SexprError", "Sym", "read_sexpr", "read_all_sexprs"]


class SexprError(ValueError):
    pass


@dataclass(frozen=True)
class Sym:
    text: str

    def __str__(self) -> str:
        return self.text


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>;[^\n]*)
      | (?P<lp>\()
      | (?P<rp>\))
      | (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<int>-?[0-9]+)
      | (?P<sym>[^\s()";]+)
    """,
    re.VERBOSE,
)


def _line_col(text: str, pos: int) -> str:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return f"{line}:{col}"


def _tokenize(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SexprError(f"{_line_col(text, pos)}: unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            yield kind, m.group(), pos
        pos = m.end()
    yield "eof", "", pos


def _parse(tokens, text, tok):
    kind, val, pos = tok
    if kind == "lp":
        items = []
        while True:
            nxt = next(tokens)
            if nxt[0] == "rp":
                return items
            if nxt[0] == "eof":
                raise SexprError(f"{_line_col(text, nxt[2])}: unbalanced '('")
            items.append(_parse(tokens, text, nxt))
    if kind == "rp":
        raise SexprError(f"{_line_col(text, pos)}: unexpected ')'")
    if kind == "str":
        body = val[1:-1]
        return body.replace('\\"', '"').replace("\\\\", "\\")
    if kind == "int":
        return int(val)
    if kind == "sym":
        return Sym(val)
    raise SexprError(f"{_line_col(text, pos)}: unexpected end of input")


def read_sexpr(text: str):
    """Read exactly one s-expression."""
    tokens = _tokenize(text)
    tok = next(tokens)
    out = _parse(tokens, text, tok)
    trailing = next(tokens)
    if trailing[0] != "eof":
        raise SexprError(f"{_line_col(text, trailing[2])}: trailing input after expression")
    return out


def read_all_sexprs(text: str) -> list:
    tokens = _tokenize(text)
    out = []
    while True:
        tok = next(tokens)
        if tok[0] == "eof":
            return out
        out.append(_parse(tokens, text, tok))
