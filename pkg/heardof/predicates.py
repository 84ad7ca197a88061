"""
Delivered predicates: elementary builders, the four operators and structural properties
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    Optional,
    Set,
    Tuple,
)

from heardof.config import enumeration_cap
from heardof.errors import (
    DimensionError,
    EmptyPredicateError,
    EnumerationCapError,
    ParameterError,
)
from heardof.expr import (
    CombineOf,
    Crash1At,
    CrashF,
    Literal,
    LossL,
    PredicateExpr,
    RepeatOf,
    SucceedOf,
    Total,
    UnionOf,
    to_text,
)
from heardof.model import (
    Collection,
    DeliveredCollection,
    Rows,
    combine_rows,
    format_mask,
    full_mask,
    kernel_mask,
    masks_with_min_size,
    submasks,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeliveredPredicate:
    """A finite set of horizon-truncated delivered collections"""

    n: int
    horizon: int
    tables: FrozenSet[Rows]
    expr: PredicateExpr = field(default=Literal(), compare=False)

    def __post_init__(self):
        if not self.tables:
            raise EmptyPredicateError(
                f"predicate {to_text(self.expr)} has no collection"
            )
        for rows in self.tables:
            if len(rows) != self.horizon or any(len(row) != self.n for row in rows):
                raise DimensionError(
                    f"member table does not have shape (R={self.horizon}, n={self.n})"
                )

    @classmethod
    def from_collections(
        cls, collections: Iterable[Collection], expr: PredicateExpr = Literal()
    ) -> "DeliveredPredicate":
        collections = list(collections)
        if not collections:
            raise EmptyPredicateError("predicate has no collection")
        n, horizon = collections[0].n, collections[0].horizon
        for c in collections:
            if (c.n, c.horizon) != (n, horizon):
                raise DimensionError("member collections disagree on shape")
        return cls(n, horizon, frozenset(c.rows for c in collections), expr)

    def __len__(self) -> int:
        return len(self.tables)

    def __iter__(self) -> Iterator[DeliveredCollection]:
        for rows in sorted(self.tables):
            yield DeliveredCollection(self.n, self.horizon, rows)

    def __contains__(self, c: object) -> bool:
        if isinstance(c, Collection):
            return (c.n, c.horizon) == (self.n, self.horizon) and c.rows in self.tables
        return c in self.tables

    def member(self, index: int) -> DeliveredCollection:
        """The index-th member in canonical order"""
        ordered = sorted(self.tables)
        if not 0 <= index < len(ordered):
            raise ParameterError(f"member {index} outside [0, {len(ordered) - 1}]")
        return DeliveredCollection(self.n, self.horizon, ordered[index])

    @property
    def total_rows(self) -> Rows:
        return DeliveredCollection.total(self.n, self.horizon).rows

    def has_total(self) -> bool:
        return self.total_rows in self.tables

    def delivered_sets(self) -> Set[int]:
        return {mask for rows in self.tables for row in rows for mask in row}

    def prefixes(self, length: int) -> Set[Tuple[int, ...]]:
        """Per-process prefixes of `length` rounds over every member"""
        return {
            tuple(row[p] for row in rows[:length])
            for rows in self.tables
            for p in range(self.n)
        }

    def row_prefixes(self, length: int) -> Set[Rows]:
        """Whole-table prefixes of `length` rounds"""
        return {rows[:length] for rows in self.tables}

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "horizon": self.horizon,
            "expr": to_text(self.expr),
            "collections": [c.to_json() for c in self],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "DeliveredPredicate":
        try:
            members = [DeliveredCollection.from_json(c) for c in data["collections"]]
        except (KeyError, TypeError) as e:
            raise ParameterError(f"malformed predicate JSON: {e}")
        return cls.from_collections(members, Literal(data.get("expr", "literal")))


def _check_shape(n: int, horizon: int) -> None:
    if n < 1:
        raise ParameterError(f"universe size must be positive, got {n}")
    if horizon < 1:
        raise ParameterError(f"horizon must be positive, got {horizon}")


def _check_cap(what: str, estimate: int, cap: Optional[int]) -> None:
    cap = enumeration_cap() if cap is None else cap
    if estimate > cap:
        logger.warning("refusing %s: %d candidates over cap %d", what, estimate, cap)
        raise EnumerationCapError(what, estimate, cap)
    logger.debug("%s: %d candidates", what, estimate)


def _check_operands(p1: DeliveredPredicate, p2: DeliveredPredicate) -> None:
    if (p1.n, p1.horizon) != (p2.n, p2.horizon):
        raise DimensionError(
            f"shape mismatch: (n={p1.n}, R={p1.horizon}) vs (n={p2.n}, R={p2.horizon})"
        )


def build_total(n: int, horizon: int) -> DeliveredPredicate:
    _check_shape(n, horizon)
    rows = DeliveredCollection.total(n, horizon).rows
    return DeliveredPredicate(n, horizon, frozenset([rows]), Total())


def build_crash1_at(n: int, horizon: int, r: int) -> DeliveredPredicate:
    """At most one crash, at round r: Σ is heard after r, a superset of Σ at r"""
    _check_shape(n, horizon)
    if not 1 <= r <= horizon:
        raise ParameterError(f"crash round {r} outside [1, {horizon}]")
    universe = full_mask(n)
    tables = set()
    for sigma in masks_with_min_size(n, n - 1):
        before = tuple((universe,) * n for _ in range(r - 1))
        after = tuple((sigma,) * n for _ in range(horizon - r))
        choices = [m for m in submasks(universe) if m & sigma == sigma]
        for crash_row in product(choices, repeat=n):
            tables.add(before + (crash_row,) + after)
    return DeliveredPredicate(n, horizon, frozenset(tables), Crash1At(r))


def build_crash1(n: int, horizon: int) -> DeliveredPredicate:
    """At most one crash, at any round of the horizon"""
    tables = set()
    for r in range(1, horizon + 1):
        tables |= build_crash1_at(n, horizon, r).tables
    expr = Crash1At(1)
    for r in range(2, horizon + 1):
        expr = UnionOf(expr, Crash1At(r))
    return DeliveredPredicate(n, horizon, frozenset(tables), expr)


def build_crashF(
    n: int, horizon: int, faults: int, cap: Optional[int] = None
) -> DeliveredPredicate:
    """
    At most F crashes: every set has at least n - F members, round r + 1 sets lie
    inside the kernel of round r, and the last kernel keeps at least n - F members
    so the table extends past the horizon.
    """
    _check_shape(n, horizon)
    if not 0 <= faults <= n:
        raise ParameterError(f"F must lie in [0, {n}], got {faults}")
    allowed = masks_with_min_size(n, n - faults)
    _check_cap(f"crash({faults})", len(allowed) ** (n * horizon), cap)

    tables = set()

    def extend(prefix: Rows, bound: int) -> None:
        if len(prefix) == horizon:
            if kernel_mask(prefix, horizon).bit_count() >= n - faults:
                tables.add(prefix)
            return
        choices = [m for m in allowed if m & bound == m]
        for row in product(choices, repeat=n):
            extend(prefix + (row,), kernel_mask((row,), 1))

    extend((), full_mask(n))
    return DeliveredPredicate(n, horizon, frozenset(tables), CrashF(faults))


def build_lossL(
    n: int, horizon: int, losses: int, cap: Optional[int] = None
) -> DeliveredPredicate:
    """At most L messages lost over the whole horizon"""
    _check_shape(n, horizon)
    if losses < 0:
        raise ParameterError(f"L must be nonnegative, got {losses}")
    slots = [(r, p, k) for r in range(horizon) for p in range(n) for k in range(n)]
    bound = min(losses, len(slots))
    _check_cap(
        f"loss({losses})", sum(comb(len(slots), i) for i in range(bound + 1)), cap
    )
    universe = full_mask(n)
    tables = set()
    for count in range(bound + 1):
        for lost in combinations(slots, count):
            rows = [[universe] * n for _ in range(horizon)]
            for r, p, k in lost:
                rows[r][p] &= ~(1 << k)
            tables.add(tuple(tuple(row) for row in rows))
    return DeliveredPredicate(n, horizon, frozenset(tables), LossL(losses))


def build_literal(
    collections: Iterable[Collection], label: str = "literal"
) -> DeliveredPredicate:
    return DeliveredPredicate.from_collections(collections, Literal(label))


def union_pred(p1: DeliveredPredicate, p2: DeliveredPredicate) -> DeliveredPredicate:
    _check_operands(p1, p2)
    return DeliveredPredicate(
        p1.n, p1.horizon, p1.tables | p2.tables, UnionOf(p1.expr, p2.expr)
    )


def combine_pred(
    p1: DeliveredPredicate, p2: DeliveredPredicate, cap: Optional[int] = None
) -> DeliveredPredicate:
    _check_operands(p1, p2)
    _check_cap("combination", len(p1) * len(p2), cap)
    tables = {combine_rows(a, b) for a in p1.tables for b in p2.tables}
    return DeliveredPredicate(p1.n, p1.horizon, frozenset(tables), CombineOf(p1.expr, p2.expr))


def succeed_pred(
    p1: DeliveredPredicate, p2: DeliveredPredicate, cap: Optional[int] = None
) -> DeliveredPredicate:
    """Every c1[1,r].c2 with the cut r clipped to [0, R]"""
    _check_operands(p1, p2)
    horizon = p1.horizon
    heads = [p1.row_prefixes(cut) for cut in range(horizon + 1)]
    tails = [p2.row_prefixes(horizon - cut) for cut in range(horizon + 1)]
    _check_cap(
        "succession",
        sum(len(h) * len(t) for h, t in zip(heads, tails)),
        cap,
    )
    tables = {
        head + tail
        for cut in range(horizon + 1)
        for head in heads[cut]
        for tail in tails[cut]
    }
    return DeliveredPredicate(p1.n, horizon, frozenset(tables), SucceedOf(p1.expr, p2.expr))


def compositions(total: int) -> Iterator[Tuple[int, ...]]:
    """Ordered sequences of positive integers summing to `total`"""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in compositions(total - first):
            yield (first,) + rest


def repeat_pred(p: DeliveredPredicate, cap: Optional[int] = None) -> DeliveredPredicate:
    """Concatenations of member prefixes, one segment per part of a composition of R"""
    horizon = p.horizon
    segments = {length: p.row_prefixes(length) for length in range(1, horizon + 1)}
    estimate = 0
    for parts in compositions(horizon):
        size = 1
        for length in parts:
            size *= len(segments[length])
        estimate += size
    _check_cap("repetition", estimate, cap)
    tables = set()
    for parts in compositions(horizon):
        for pieces in product(*(segments[length] for length in parts)):
            tables.add(sum(pieces, ()))
    return DeliveredPredicate(p.n, horizon, frozenset(tables), RepeatOf(p.expr))


def build_expr(
    expr: PredicateExpr, n: int, horizon: int, cap: Optional[int] = None
) -> DeliveredPredicate:
    """Evaluate an expression tree at universe size n and horizon R"""
    if isinstance(expr, Total):
        return build_total(n, horizon)
    if isinstance(expr, Crash1At):
        return build_crash1_at(n, horizon, expr.round)
    if isinstance(expr, CrashF):
        return build_crashF(n, horizon, expr.faults, cap)
    if isinstance(expr, LossL):
        return build_lossL(n, horizon, expr.losses, cap)
    if isinstance(expr, UnionOf):
        return union_pred(build_expr(expr.left, n, horizon, cap), build_expr(expr.right, n, horizon, cap))
    if isinstance(expr, CombineOf):
        return combine_pred(
            build_expr(expr.left, n, horizon, cap),
            build_expr(expr.right, n, horizon, cap),
            cap,
        )
    if isinstance(expr, SucceedOf):
        return succeed_pred(
            build_expr(expr.left, n, horizon, cap),
            build_expr(expr.right, n, horizon, cap),
            cap,
        )
    if isinstance(expr, RepeatOf):
        return repeat_pred(build_expr(expr.operand, n, horizon, cap), cap)
    raise ParameterError(f"cannot build {expr!r} without its member collections")


# Structural properties


def _uniform(row: Tuple[int, ...]) -> Optional[int]:
    first = row[0]
    return first if all(mask == first for mask in row) else None


def round_symmetry_gap(p: DeliveredPredicate) -> Optional[Dict[str, Any]]:
    """A delivered set missing at some (round, process) position, if any"""
    wanted = p.delivered_sets()
    for r in range(p.horizon):
        for j in range(p.n):
            present = {rows[r][j] for rows in p.tables}
            missing = wanted - present
            if missing:
                return {"round": r + 1, "process": j, "set": min(missing)}
    return None


def is_round_symmetric(p: DeliveredPredicate) -> bool:
    return round_symmetry_gap(p) is None


def prefix_symmetry_gap(p: DeliveredPredicate) -> Optional[Dict[str, Any]]:
    for length in range(1, p.horizon + 1):
        per_process = [
            {tuple(row[j] for row in rows[:length]) for rows in p.tables}
            for j in range(p.n)
        ]
        everything = set().union(*per_process)
        for j, prefixes in enumerate(per_process):
            missing = everything - prefixes
            if missing:
                return {"process": j, "prefix": list(min(missing))}
    return None


def is_prefix_symmetric(p: DeliveredPredicate) -> bool:
    return prefix_symmetry_gap(p) is None


def common_round_gap(p: DeliveredPredicate) -> Optional[Dict[str, Any]]:
    """
    The first (round, set) pair no member realizes as all-Π rounds followed by a
    round where every process gets that set. The total collection is required.
    """
    if not p.has_total():
        return {"missing": "total collection"}
    universe = full_mask(p.n)
    covered = set()
    for rows in p.tables:
        for r, row in enumerate(rows, start=1):
            value = _uniform(row)
            if value is not None:
                covered.add((r, value))
            if value != universe:
                break
    for r in range(1, p.horizon + 1):
        for mask in sorted(p.delivered_sets()):
            if (r, mask) not in covered:
                return {"round": r, "set": mask}
    return None


def has_common_round(p: DeliveredPredicate) -> bool:
    return common_round_gap(p) is None


def common_prefix_gap(p: DeliveredPredicate) -> Optional[Dict[str, Any]]:
    """The first per-process prefix that no member gives to every process at once"""
    uniform = set()
    for rows in p.tables:
        prefix: Tuple[int, ...] = ()
        for row in rows:
            value = _uniform(row)
            if value is None:
                break
            prefix += (value,)
            uniform.add(prefix)
    for length in range(1, p.horizon + 1):
        for prefix in sorted(p.prefixes(length)):
            if prefix not in uniform:
                return {"prefix": list(prefix)}
    return None


def has_common_prefix(p: DeliveredPredicate) -> bool:
    return common_prefix_gap(p) is None


def describe_gap(gap: Dict[str, Any]) -> Dict[str, Any]:
    """Replace bitmasks in a gap payload by process-set display strings"""
    shown = dict(gap)
    if "set" in shown:
        shown["set"] = format_mask(shown["set"])
    if "prefix" in shown:
        shown["prefix"] = [format_mask(m) for m in shown["prefix"]]
    if "process" in shown:
        shown["process"] = f"p{shown['process'] + 1}"
    return shown
