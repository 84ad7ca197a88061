"""
Strategies: which local states allow a process to change round
"""

from __future__ import annotations

import enum
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import product
from typing import Any, Dict, FrozenSet, Iterable, Sequence, Tuple

from heardof.errors import DimensionError, HeardOfError, ParameterError, StrategyError
from heardof.model import (
    LocalState,
    ProcessSet,
    full_mask,
    iter_indexes,
    make_mask,
    masks_with_min_size,
)
from heardof.predicates import DeliveredPredicate

logger = logging.getLogger(__name__)


class StrategyKind(str, enum.Enum):
    OBLIVIOUS = "oblivious"
    CONSERVATIVE = "conservative"
    FUTURE = "f_loss"
    UNION = "union"


class Strategy(ABC):
    """
    A set of local states, tested through `accepts`.

    `heard[i]` is the mask of senders of round i + 1 messages held; it covers
    rounds 1..round + lookahead.
    """

    kind: StrategyKind
    n: int
    # how many rounds past the current one the strategy reads
    lookahead: int = 0

    @abstractmethod
    def accepts(self, round: int, heard: Sequence[int]) -> bool:
        ...

    @abstractmethod
    def window(self, round: int) -> Tuple[int, ...]:
        """Message rounds read by the decision at `round`"""

    def contains(self, q: LocalState) -> bool:
        return self.accepts(q.round, q.heard(q.round + self.lookahead))

    def __contains__(self, q: object) -> bool:
        return isinstance(q, LocalState) and self.contains(q)

    @abstractmethod
    def to_json(self) -> Dict[str, Any]:
        ...


@dataclass(frozen=True)
class ObliviousStrategy(Strategy):
    """Accepts a state iff the senders of the current round form a set in `nexts`"""

    n: int
    nexts: FrozenSet[int]

    kind = StrategyKind.OBLIVIOUS

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"universe size must be positive, got {self.n}")
        universe = full_mask(self.n)
        if any(m & ~universe for m in self.nexts):
            raise DimensionError(f"nexts exceed a universe of {self.n}")
        if not self.nexts:
            logger.warning("empty oblivious strategy: no state can change round")

    @classmethod
    def of(cls, n: int, sets: Iterable[ProcessSet]) -> "ObliviousStrategy":
        return cls(n, frozenset(s.bits for s in sets))

    def accepts(self, round: int, heard: Sequence[int]) -> bool:
        return heard[round - 1] in self.nexts

    def window(self, round: int) -> Tuple[int, ...]:
        return (round,)

    def next_sets(self) -> list:
        return [ProcessSet(m) for m in sorted(self.nexts)]

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "nexts": [list(iter_indexes(m)) for m in sorted(self.nexts)],
        }


@dataclass(frozen=True)
class ConservativeStrategy(Strategy):
    """Accepts a state iff its messages up to the current round form a stored prefix"""

    n: int
    horizon: int
    nexts_c: FrozenSet[Tuple[int, ...]]

    kind = StrategyKind.CONSERVATIVE

    def __post_init__(self):
        if self.n < 1 or self.horizon < 1:
            raise ParameterError("universe size and horizon must be positive")
        universe = full_mask(self.n)
        for prefix in self.nexts_c:
            if not 1 <= len(prefix) <= self.horizon:
                raise DimensionError(
                    f"prefix of {len(prefix)} rounds outside [1, {self.horizon}]"
                )
            if any(m & ~universe for m in prefix):
                raise DimensionError(f"prefix exceeds a universe of {self.n}")
        if not self.nexts_c:
            logger.warning("empty conservative strategy: no state can change round")

    def accepts(self, round: int, heard: Sequence[int]) -> bool:
        return tuple(heard[:round]) in self.nexts_c

    def window(self, round: int) -> Tuple[int, ...]:
        return tuple(range(1, round + 1))

    def oblivious_projection(self) -> ObliviousStrategy:
        """The oblivious strategy with the last set of every stored prefix"""
        return ObliviousStrategy(self.n, frozenset(p[-1] for p in self.nexts_c))

    def to_json(self) -> Dict[str, Any]:
        ordered = sorted(self.nexts_c, key=lambda p: (len(p), p))
        return {
            "kind": self.kind.value,
            "n": self.n,
            "horizon": self.horizon,
            "nextsC": [
                {"round": len(p), "prefix": [list(iter_indexes(m)) for m in p]}
                for p in ordered
            ],
        }


@dataclass(frozen=True)
class LossStrategy(Strategy):
    """
    Waits for every message of the current round, or for all but one of the
    current round together with all but one of the next round.
    """

    n: int

    kind = StrategyKind.FUTURE
    lookahead = 1

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"f_loss needs at least 2 processes, got {self.n}")

    def accepts(self, round: int, heard: Sequence[int]) -> bool:
        current = heard[round - 1].bit_count()
        if current == self.n:
            return True
        after = heard[round].bit_count() if len(heard) > round else 0
        return current == self.n - 1 and after == self.n - 1

    def window(self, round: int) -> Tuple[int, ...]:
        return (round, round + 1)

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "n": self.n}


@dataclass(frozen=True)
class StrategyUnion(Strategy):
    """Membership-level union for operands without a shared closed form"""

    n: int
    parts: Tuple[Strategy, ...]

    kind = StrategyKind.UNION

    def __post_init__(self):
        object.__setattr__(
            self, "lookahead", max(part.lookahead for part in self.parts)
        )

    def accepts(self, round: int, heard: Sequence[int]) -> bool:
        return any(part.accepts(round, heard) for part in self.parts)

    def window(self, round: int) -> Tuple[int, ...]:
        rounds = set()
        for part in self.parts:
            rounds.update(part.window(round))
        return tuple(sorted(rounds))

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "parts": [part.to_json() for part in self.parts],
        }


def strategy_from_json(data: Dict[str, Any]) -> Strategy:
    try:
        kind = StrategyKind(data["kind"])
        n = int(data["n"])
        if kind is StrategyKind.OBLIVIOUS:
            return ObliviousStrategy(n, frozenset(make_mask(s) for s in data["nexts"]))
        if kind is StrategyKind.CONSERVATIVE:
            prefixes = frozenset(
                tuple(make_mask(s) for s in entry["prefix"]) for entry in data["nextsC"]
            )
            return ConservativeStrategy(n, int(data["horizon"]), prefixes)
        if kind is StrategyKind.FUTURE:
            return LossStrategy(n)
        return StrategyUnion(n, tuple(strategy_from_json(p) for p in data["parts"]))
    except HeardOfError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParameterError(f"malformed strategy JSON: {e}")


# Concrete strategies


def f_n_minus_F(n: int, faults: int) -> ObliviousStrategy:
    """Wait for at least n - F messages of the current round"""
    if not 0 <= faults <= n:
        raise ParameterError(f"F must lie in [0, {n}], got {faults}")
    return ObliviousStrategy(n, frozenset(masks_with_min_size(n, n - faults)))


def f_loss(n: int) -> LossStrategy:
    return LossStrategy(n)


def minimal_oblivious(p: DeliveredPredicate) -> ObliviousStrategy:
    return ObliviousStrategy(p.n, frozenset(p.delivered_sets()))


def minimal_conservative(p: DeliveredPredicate) -> ConservativeStrategy:
    prefixes = set()
    for length in range(1, p.horizon + 1):
        prefixes |= p.prefixes(length)
    return ConservativeStrategy(p.n, p.horizon, frozenset(prefixes))


def conservative_lift(f: ObliviousStrategy, horizon: int) -> ConservativeStrategy:
    """The conservative representation of an oblivious strategy up to `horizon`"""
    universe = range(1 << f.n)
    prefixes = set()
    for length in range(1, horizon + 1):
        for head in product(universe, repeat=length - 1):
            for last in f.nexts:
                prefixes.add(head + (last,))
    return ConservativeStrategy(f.n, horizon, frozenset(prefixes))


def oblivious_valid_for(f: ObliviousStrategy, p: DeliveredPredicate) -> bool:
    """Valid iff every delivered set of the predicate allows a round change"""
    if f.n != p.n:
        raise DimensionError(f"strategy over {f.n} processes, predicate over {p.n}")
    return f.nexts >= minimal_oblivious(p).nexts


def conservative_valid_for(f: ConservativeStrategy, p: DeliveredPredicate) -> bool:
    """Valid iff every per-process prefix of the predicate allows a round change"""
    if f.n != p.n:
        raise DimensionError(f"strategy over {f.n} processes, predicate over {p.n}")
    if f.horizon < p.horizon:
        raise DimensionError(
            f"strategy stores {f.horizon} rounds, predicate spans {p.horizon}"
        )
    return f.nexts_c >= minimal_conservative(p).nexts_c


# Operations


def _as_pair(f1: Strategy, f2: Strategy) -> Tuple[Strategy, Strategy]:
    """Bring an oblivious/conservative pair to a shared closed form"""
    if f1.n != f2.n:
        raise DimensionError(f"strategies over {f1.n} and {f2.n} processes")
    if isinstance(f1, ConservativeStrategy) and isinstance(f2, ConservativeStrategy):
        if f1.horizon != f2.horizon:
            raise DimensionError(
                f"conservative strategies up to {f1.horizon} and {f2.horizon} rounds"
            )
    if isinstance(f1, ObliviousStrategy) and isinstance(f2, ConservativeStrategy):
        return conservative_lift(f1, f2.horizon), f2
    if isinstance(f1, ConservativeStrategy) and isinstance(f2, ObliviousStrategy):
        return f1, conservative_lift(f2, f1.horizon)
    return f1, f2


def _closed_form(f1: Strategy, f2: Strategy, operation: str) -> Tuple[Strategy, Strategy]:
    f1, f2 = _as_pair(f1, f2)
    if type(f1) is not type(f2) or not isinstance(
        f1, (ObliviousStrategy, ConservativeStrategy)
    ):
        raise StrategyError(
            f"{operation} needs oblivious or conservative operands, "
            f"got {f1.kind.value} and {f2.kind.value}"
        )
    return f1, f2


def strat_union(f1: Strategy, f2: Strategy) -> Strategy:
    f1, f2 = _as_pair(f1, f2)
    if isinstance(f1, ObliviousStrategy) and isinstance(f2, ObliviousStrategy):
        return ObliviousStrategy(f1.n, f1.nexts | f2.nexts)
    if isinstance(f1, ConservativeStrategy) and isinstance(f2, ConservativeStrategy):
        return ConservativeStrategy(f1.n, f1.horizon, f1.nexts_c | f2.nexts_c)
    return StrategyUnion(f1.n, (f1, f2))


def strat_combine(f1: Strategy, f2: Strategy) -> Strategy:
    """States whose messages split into two accepted states of the same round"""
    f1, f2 = _closed_form(f1, f2, "combination")
    if isinstance(f1, ObliviousStrategy):
        return ObliviousStrategy(f1.n, frozenset(a & b for a in f1.nexts for b in f2.nexts))
    combined = frozenset(
        tuple(x & y for x, y in zip(a, b))
        for a in f1.nexts_c
        for b in f2.nexts_c
        if len(a) == len(b)
    )
    return ConservativeStrategy(f1.n, f1.horizon, combined)


def strat_succeed(f1: Strategy, f2: Strategy) -> Strategy:
    f1, f2 = _closed_form(f1, f2, "succession")
    if isinstance(f1, ObliviousStrategy):
        return ObliviousStrategy(f1.n, f1.nexts | f2.nexts)
    joined = {
        a + b
        for a in f1.nexts_c
        for b in f2.nexts_c
        if len(a) + len(b) <= f1.horizon
    }
    return ConservativeStrategy(f1.n, f1.horizon, f1.nexts_c | f2.nexts_c | frozenset(joined))


def strat_repeat(f: Strategy) -> Strategy:
    if isinstance(f, ObliviousStrategy):
        return f
    if not isinstance(f, ConservativeStrategy):
        raise StrategyError(
            f"repetition needs an oblivious or conservative operand, got {f.kind.value}"
        )
    closure = set(f.nexts_c)
    frontier = set(f.nexts_c)
    while frontier:
        grown = {
            a + b
            for a in frontier
            for b in f.nexts_c
            if len(a) + len(b) <= f.horizon
        } - closure
        closure |= grown
        frontier = grown
    return ConservativeStrategy(f.n, f.horizon, frozenset(closure))


def empty_strategy(n: int) -> ObliviousStrategy:
    return ObliviousStrategy(n, frozenset())
