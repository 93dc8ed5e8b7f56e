"""Tokenizer and recursive-descent parser for bracket expressions.

Grammar (``{}`` repeats, ``[]`` is optional)::

    expr      := bracket | expect | var
    bracket   := "P" "(" side "|" { obsref "|" } side ")"
    side      := eventexpr | "Omega" | "Omega_" number
    expect    := "E" "[" obstree "]" [ "|" eventexpr ]
    var       := "Var" "[" obstree "]"
    eventexpr := term { ("∪" | "+" | "|u") term }
    term      := factor { ("∩" | "&") factor }
    factor    := "~" factor | name | "(" eventexpr ")"
    obstree   := obsterm { "+" obsterm }
    obsterm   := obsfactor { "*" obsfactor }
    obsfactor := name | number | "(" obstree ")"

``Ω`` may be written for ``Omega``.  ``Omega_t`` is allowed only on the
right of a bracket, and observables between the bars only when both ends
are ``Omega``-type.  The ASCII union ``|u`` is recognised only when the
``u`` is followed by whitespace, ``(`` or ``~``; otherwise ``|`` is a bar
and ``u...`` starts a name.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .nodes import (Bracket, Complement, Expect, Intersect, Name, Num, ObsName, Omega, OmegaT,
                    Product, Sum, Union_, Var)

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("OMEGA_T", rf"(?:Omega|Ω)_(?P<time>{_NUMBER})"),
    ("OMEGA", r"(?:Omega|Ω)(?![A-Za-z0-9_])"),
    ("UNION", r"∪|\+|\|u(?=[ \t\r\n(~])"),
    ("NUMBER", _NUMBER),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("BAR", r"\|"),
    ("INTER", r"∩|&"),
    ("NOT", r"~"),
    ("STAR", r"\*"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("LBRACK", r"\["),
    ("RBRACK", r"\]"),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))

# readable names for "expected" sets in error messages
_SHOW = {
    "NAME": "name", "NUMBER": "number", "OMEGA": "'Omega'", "OMEGA_T": "'Omega_<t>'",
    "UNION": "'+'", "INTER": "'&'", "NOT": "'~'", "STAR": "'*'", "BAR": "'|'",
    "LPAREN": "'('", "RPAREN": "')'", "LBRACK": "'['", "RBRACK": "']'", "EOF": "end of input",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(src: str) -> list[Token]:
    """Split ``src`` into tokens, ending with an EOF token.

    Raises
    ------
    ParseError
        On a character that starts no token.
    """
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _MASTER.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = "OMEGA_T" if m.group("time") is not None else m.lastgroup
        text = m.group(0)
        if kind != "WS":
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, expected, tok: Token | None = None, message: str | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise ParseError(message or f"unexpected {found}", tok.line, tok.column,
                         [_SHOW.get(e, e) for e in expected])

    def number(self, tok: Token, text: str) -> float:
        value = float(text)
        if value == float("inf"):
            self.error(["NUMBER"], tok, f"number {text} is too large")
        return value

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            self.error([repr(text) if text else kind])
        return self.advance()

    # -- top level

    def parse(self):
        tok = self.tok
        nxt = self.peek()
        if tok.kind == "NAME" and tok.text == "P" and nxt.kind == "LPAREN":
            node = self.bracket()
        elif tok.kind == "NAME" and tok.text == "E" and nxt.kind == "LBRACK":
            node = self.expectation()
        elif tok.kind == "NAME" and tok.text == "Var" and nxt.kind == "LBRACK":
            node = self.variance()
        else:
            self.error(["'P('", "'E['", "'Var['"])
        if self.tok.kind != "EOF":
            self.error(["EOF"])
        return node

    def bracket(self):
        self.advance()
        self.advance()
        parts = [(self.tok, self.side())]
        if self.tok.kind != "BAR":
            self.error(["BAR", "UNION", "INTER"])
        while self.tok.kind == "BAR":
            self.advance()
            parts.append((self.tok, self.side()))
        if self.tok.kind != "RPAREN":
            self.error(["BAR", "UNION", "INTER", "RPAREN"])
        self.advance()
        (_, lhs), *middle, (rhs_tok, rhs) = parts
        if isinstance(lhs, OmegaT):
            self.error(["NAME", "OMEGA"], parts[0][0], "'Omega_<t>' is only allowed on the right")
        mids = []
        for tok, node in middle:
            if not isinstance(node, Name):
                self.error(["NAME"], tok, "only observable names may stand between the bars")
            mids.append(node.id)
        if mids and not (isinstance(lhs, Omega) and isinstance(rhs, (Omega, OmegaT))):
            self.error(["OMEGA"], parts[0][0],
                       "observables between the bars need Omega at both ends")
        return Bracket(lhs, tuple(mids), rhs)

    def side(self):
        tok = self.tok
        if tok.kind == "OMEGA":
            self.advance()
            return Omega()
        if tok.kind == "OMEGA_T":
            self.advance()
            return OmegaT(self.number(tok, tok.text.split("_", 1)[1]))
        if tok.kind not in ("NOT", "NAME", "LPAREN"):
            self.error(["NOT", "NAME", "LPAREN", "OMEGA", "OMEGA_T"])
        return self.eventexpr()

    def expectation(self):
        self.advance()
        self.advance()
        obs = self.obstree()
        self.expect("RBRACK")
        given = None
        if self.tok.kind == "BAR":
            self.advance()
            given = self.eventexpr()
        return Expect(obs, given)

    def variance(self):
        self.advance()
        self.advance()
        obs = self.obstree()
        self.expect("RBRACK")
        return Var(obs)

    # -- events

    def eventexpr(self):
        node = self.term()
        while self.tok.kind == "UNION":
            self.advance()
            node = Union_(node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "INTER":
            self.advance()
            node = Intersect(node, self.factor())
        return node

    def factor(self):
        tok = self.tok
        if tok.kind == "NOT":
            self.advance()
            return Complement(self.factor())
        if tok.kind == "NAME":
            self.advance()
            return Name(tok.text)
        if tok.kind == "LPAREN":
            self.advance()
            node = self.eventexpr()
            self.expect("RPAREN")
            return node
        self.error(["NOT", "NAME", "LPAREN"])

    # -- observables

    def obstree(self):
        node = self.obsterm()
        while self.tok.kind == "UNION" and self.tok.text == "+":
            self.advance()
            node = Sum(node, self.obsterm())
        return node

    def obsterm(self):
        node = self.obsfactor()
        while self.tok.kind == "STAR":
            self.advance()
            node = Product(node, self.obsfactor())
        return node

    def obsfactor(self):
        tok = self.tok
        if tok.kind == "NAME":
            self.advance()
            return ObsName(tok.text)
        if tok.kind == "NUMBER":
            self.advance()
            return Num(self.number(tok, tok.text))
        if tok.kind == "LPAREN":
            self.advance()
            node = self.obstree()
            self.expect("RPAREN")
            return node
        self.error(["NAME", "NUMBER", "LPAREN"])


def parse(src: str):
    """Parse one bracket expression.

    Raises
    ------
    ParseError
        With line, column and the set of tokens that would have been accepted.
    """
    return _Parser(src).parse()
