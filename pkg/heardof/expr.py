"""
Expression trees for delivered predicates and their text form
"""

from dataclasses import dataclass
from typing import Union

# Binding strength, loosest first
PREC_UNION = 1
PREC_COMBINE = 2
PREC_SUCCEED = 3
PREC_REPEAT = 4
PREC_ATOM = 5


@dataclass(frozen=True)
class Total:
    def to_text(self) -> str:
        return "total"


@dataclass(frozen=True)
class Crash1At:
    """At most one crash, happening at round `round`"""

    round: int

    def to_text(self) -> str:
        return f"crash1@{self.round}"


@dataclass(frozen=True)
class CrashF:
    faults: int

    def to_text(self) -> str:
        return f"crash({self.faults})"


@dataclass(frozen=True)
class LossL:
    losses: int

    def to_text(self) -> str:
        return f"loss({self.losses})"


@dataclass(frozen=True)
class Literal:
    """A predicate given by its member collections rather than a construction"""

    label: str = "literal"

    def to_text(self) -> str:
        return f"<{self.label}>"


@dataclass(frozen=True)
class UnionOf:
    left: "PredicateExpr"
    right: "PredicateExpr"

    def to_text(self) -> str:
        return _binary(self, "|", PREC_UNION)


@dataclass(frozen=True)
class CombineOf:
    left: "PredicateExpr"
    right: "PredicateExpr"

    def to_text(self) -> str:
        return _binary(self, "(*)", PREC_COMBINE)


@dataclass(frozen=True)
class SucceedOf:
    left: "PredicateExpr"
    right: "PredicateExpr"

    def to_text(self) -> str:
        return _binary(self, "~>", PREC_SUCCEED)


@dataclass(frozen=True)
class RepeatOf:
    operand: "PredicateExpr"

    def to_text(self) -> str:
        return _wrap(self.operand, precedence(self.operand) < PREC_REPEAT) + "^w"


PredicateExpr = Union[
    Total, Crash1At, CrashF, LossL, Literal, UnionOf, CombineOf, SucceedOf, RepeatOf
]


def precedence(expr: PredicateExpr) -> int:
    if isinstance(expr, UnionOf):
        return PREC_UNION
    if isinstance(expr, CombineOf):
        return PREC_COMBINE
    if isinstance(expr, SucceedOf):
        return PREC_SUCCEED
    if isinstance(expr, RepeatOf):
        return PREC_REPEAT
    return PREC_ATOM


def _wrap(expr: PredicateExpr, parens: bool) -> str:
    text = expr.to_text()
    return f"({text})" if parens else text


def _binary(expr, symbol: str, prec: int) -> str:
    # left-associative: a right operand at the same level needs parentheses
    left = _wrap(expr.left, precedence(expr.left) < prec)
    right = _wrap(expr.right, precedence(expr.right) <= prec)
    return f"{left} {symbol} {right}"


def to_text(expr: PredicateExpr) -> str:
    return expr.to_text()
