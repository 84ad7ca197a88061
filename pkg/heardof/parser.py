"""
Parser for the predicate expression language

    expr    := expr ('|' | '(*)' | '~>') expr   precedence: ~> over (*) over |
    postfix := primary ('^w')*
    primary := 'total' | 'crash1@' INT | 'crash(' INT ')' | 'loss(' INT ')'
             | '(' expr ')'

All binary operators are left-associative. The Unicode spellings ∪, ⊗, ⇝ and ^ω
are accepted as aliases.
"""

import re
from dataclasses import dataclass
from typing import List, Optional

from heardof.errors import ExprSyntaxError
from heardof.expr import (
    CombineOf,
    Crash1At,
    CrashF,
    LossL,
    PredicateExpr,
    RepeatOf,
    SucceedOf,
    Total,
    UnionOf,
)

# (token kind, pattern); order matters: '(*)' before '('
TOKEN_PATTERNS = [
    ("COMBINE", r"\(\*\)|⊗"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("UNION", r"\||∪"),
    ("SUCCEED", r"~>|⇝"),
    ("REPEAT", r"\^w|\^ω"),
    ("CRASH1", r"crash1@"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("INT", r"\d+"),
    ("SPACE", r"\s+"),
]

TOKEN_RE = re.compile("|".join(f"(?P<{kind}>{pat})" for kind, pat in TOKEN_PATTERNS))

BINARY = {
    "UNION": (1, UnionOf),
    "COMBINE": (2, CombineOf),
    "SUCCEED": (3, SucceedOf),
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN_RE.match(text, position)
        if match is None:
            raise ExprSyntaxError(
                f"unexpected character {text[position]!r}", position, text
            )
        if match.lastgroup != "SPACE":
            tokens.append(Token(match.lastgroup, match.group(), position))
        position = match.end()
    return tokens


class Parser:
    """Precedence-climbing parser over a token list"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self) -> Optional[Token]:
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return None

    def position(self) -> int:
        token = self.peek()
        return token.position if token else len(self.text)

    def error(self, message: str):
        raise ExprSyntaxError(message, self.position(), self.text)

    def expect(self, kind: str, what: str) -> Token:
        token = self.peek()
        if token is None or token.kind != kind:
            found = f"{token.text!r}" if token else "end of input"
            self.error(f"expected {what}, found {found}")
        self.index += 1
        return token

    def parse(self) -> PredicateExpr:
        if not self.tokens:
            self.error("empty expression")
        expr = self.parse_expr(1)
        if self.peek() is not None:
            self.error(f"unexpected {self.peek().text!r}")
        return expr

    def parse_expr(self, min_prec: int) -> PredicateExpr:
        left = self.parse_postfix()
        while True:
            token = self.peek()
            if token is None or token.kind not in BINARY:
                return left
            prec, node = BINARY[token.kind]
            if prec < min_prec:
                return left
            self.index += 1
            right = self.parse_expr(prec + 1)
            left = node(left, right)

    def parse_postfix(self) -> PredicateExpr:
        expr = self.parse_primary()
        while self.peek() is not None and self.peek().kind == "REPEAT":
            self.index += 1
            expr = RepeatOf(expr)
        return expr

    def parse_int(self) -> int:
        token = self.expect("INT", "an integer")
        return int(token.text)

    def parse_primary(self) -> PredicateExpr:
        token = self.peek()
        if token is None:
            self.error("expected an operand, found end of input")
        if token.kind == "LPAREN":
            self.index += 1
            expr = self.parse_expr(1)
            self.expect("RPAREN", "')'")
            return expr
        if token.kind == "CRASH1":
            self.index += 1
            start = self.position()
            value = self.parse_int()
            if value < 1:
                raise ExprSyntaxError("crash round must be at least 1", start, self.text)
            return Crash1At(value)
        if token.kind == "NAME":
            if token.text == "total":
                self.index += 1
                return Total()
            if token.text in ("crash", "loss"):
                self.index += 1
                self.expect("LPAREN", "'('")
                value = self.parse_int()
                self.expect("RPAREN", "')'")
                return CrashF(value) if token.text == "crash" else LossL(value)
            self.error(f"unknown predicate {token.text!r}")
        self.error(f"unexpected {token.text!r}")


def parse_expr(text: str) -> PredicateExpr:
    """Parse predicate expression text into an expression tree"""
    return Parser(text).parse()
