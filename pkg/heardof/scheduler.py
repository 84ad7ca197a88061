"""
Bounded scheduler search: every heard-of collection a strategy can generate on
a delivered predicate, plus the fair executions where some process blocks.

A delivery only changes the state of its receiver, and a message stays
deliverable once its sender has sent it. Every execution can therefore be
rearranged so that deliveries to j happen right before j's next transitions,
without changing any local state at a next. The search branches on which
process changes round and on which newly available messages it holds at that
moment, restricted to the message rounds the strategy reads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Any, Dict, FrozenSet, List, Optional, Set, Tuple

from heardof.config import DEFAULT_BUDGET
from heardof.errors import DimensionError, ParameterError
from heardof.model import (
    DeliveredCollection,
    HeardOfCollection,
    Rows,
    full_mask,
    submasks,
)
from heardof.predicates import DeliveredPredicate
from heardof.strategies import ConservativeStrategy, Strategy

logger = logging.getLogger(__name__)

# (rounds completed per process, held sender masks per process and message round)
State = Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]
UNDECIDED = -1


@dataclass(frozen=True)
class Deadlock:
    """A fair execution of the collection where some process stops short of R rounds"""

    collection: DeliveredCollection
    rounds: Tuple[int, ...]

    def to_json(self) -> Dict[str, Any]:
        return {"collection": self.collection.to_json(), "rounds": list(self.rounds)}


@dataclass(frozen=True)
class EnumerationResult:
    n: int
    horizon: int
    collections: FrozenSet[HeardOfCollection]
    deadlocks: Tuple[Deadlock, ...]
    partial: bool
    explored: int

    @property
    def deadlock_free(self) -> bool:
        return not self.deadlocks

    def sorted_collections(self) -> List[HeardOfCollection]:
        return sorted(self.collections, key=lambda c: c.rows)


class MemberSearch:
    """Memoized search over the executions of one delivered collection"""

    def __init__(self, f: Strategy, rows: Rows, n: int, horizon: int, budget: int):
        self.f = f
        self.rows = rows
        self.n = n
        self.horizon = horizon
        self.budget = budget
        self.lookahead = f.lookahead
        # highest message round ever delivered; R + 1 only for strategies reading ahead
        self.top = horizon + (1 if f.lookahead else 0)
        self.universe = full_mask(n)
        self.keep = [self._kept_rounds(r) for r in range(horizon + 1)]
        self.memo: Dict[State, FrozenSet[Tuple[int, ...]]] = {}
        self.deadlocks: Set[Tuple[int, ...]] = set()
        self.explored = 0
        self.partial = False

    def _kept_rounds(self, done: int) -> Tuple[bool, ...]:
        """Message rounds still read by decisions after `done` completed rounds"""
        read = set()
        for r in range(done + 1, self.horizon + 1):
            read.update(self.f.window(r))
        return tuple(w in read for w in range(1, self.top + 1))

    def available(self, done: Tuple[int, ...], j: int, w: int) -> int:
        """Round-w senders whose message to j is in the collection and already sent"""
        if w <= self.horizon:
            allowed = self.rows[w - 1][j]
        else:
            allowed = self.universe
        ready = 0
        for k in range(self.n):
            if done[k] >= w - 1:
                ready |= 1 << k
        return allowed & ready

    def accepts(self, j_round: int, heard: Tuple[int, ...]) -> bool:
        return self.f.accepts(j_round, heard[: j_round + self.lookahead])

    def saturate(self, state: State) -> Tuple[int, ...]:
        """Deliver everything, let every process in f move, repeat until stable"""
        done = list(state[0])
        heard = [list(h) for h in state[1]]
        moved = True
        while moved:
            moved = False
            frozen_done = tuple(done)
            for j in range(self.n):
                if done[j] < self.horizon:
                    for w in range(1, self.top + 1):
                        heard[j][w - 1] |= self.available(frozen_done, j, w)
            for j in range(self.n):
                r = done[j] + 1
                if done[j] < self.horizon and self.accepts(r, tuple(heard[j])):
                    done[j] += 1
                    moved = True
        return tuple(done)

    def check_deadlock(self, state: State) -> None:
        final = self.saturate(state)
        if any(d < self.horizon for d in final):
            if final not in self.deadlocks:
                logger.debug("deadlock with rounds %s", final)
            self.deadlocks.add(final)

    def explore(self, state: State) -> FrozenSet[Tuple[int, ...]]:
        cached = self.memo.get(state)
        if cached is not None:
            return cached
        if self.partial:
            return frozenset()
        self.check_deadlock(state)
        done, heard = state
        if all(d == self.horizon for d in done):
            result = frozenset([(UNDECIDED,) * (self.n * self.horizon)])
            self.memo[state] = result
            return result

        results: Set[Tuple[int, ...]] = set()
        for j in range(self.n):
            if done[j] >= self.horizon:
                continue
            r = done[j] + 1
            window = [w for w in self.f.window(r) if w <= self.top]
            options = [
                list(submasks(self.available(done, j, w) & ~heard[j][w - 1]))
                for w in window
            ]
            slot = (r - 1) * self.n + j
            for extras in product(*options):
                self.explored += 1
                if self.explored > self.budget:
                    self.partial = True
                    break
                held = list(heard[j])
                for w, extra in zip(window, extras):
                    held[w - 1] |= extra
                if not self.accepts(r, tuple(held)):
                    continue
                value = held[r - 1]
                kept = tuple(m if keep else 0 for m, keep in zip(held, self.keep[r]))
                child = (
                    done[:j] + (r,) + done[j + 1 :],
                    heard[:j] + (kept,) + heard[j + 1 :],
                )
                for suffix in self.explore(child):
                    results.add(suffix[:slot] + (value,) + suffix[slot + 1 :])
            if self.partial:
                break
        result = frozenset(results)
        self.memo[state] = result
        return result

    def run(self) -> Tuple[FrozenSet[Rows], List[Tuple[int, ...]], bool, int]:
        start: State = (
            (0,) * self.n,
            tuple((0,) * self.top for _ in range(self.n)),
        )
        flats = self.explore(start)
        tables = frozenset(
            tuple(
                tuple(flat[r * self.n : (r + 1) * self.n]) for r in range(self.horizon)
            )
            for flat in flats
        )
        return tables, sorted(self.deadlocks), self.partial, self.explored


def _search_member(task: Tuple[Strategy, Rows, int, int, int]):
    f, rows, n, horizon, budget = task
    return MemberSearch(f, rows, n, horizon, budget).run()


def enumerate_ho_bounded(
    f: Strategy,
    p: DeliveredPredicate,
    budget: Optional[int] = None,
    workers: int = 1,
) -> EnumerationResult:
    """
    Heard-of collections generated by f on the members of p, with deadlocks.

    `budget` bounds the explored next transitions per member collection; a
    search that hits it is reported partial.
    """
    if f.n != p.n:
        raise DimensionError(f"strategy over {f.n} processes, predicate over {p.n}")
    if isinstance(f, ConservativeStrategy) and f.horizon < p.horizon:
        raise DimensionError(
            f"strategy stores {f.horizon} rounds, predicate spans {p.horizon}"
        )
    budget = DEFAULT_BUDGET if budget is None else budget
    if budget < 1:
        raise ParameterError(f"budget must be positive, got {budget}")
    if workers < 1:
        raise ParameterError(f"workers must be positive, got {workers}")

    members = sorted(p.tables)
    tasks = [(f, rows, p.n, p.horizon, budget) for rows in members]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_search_member, tasks))
    else:
        outcomes = [_search_member(task) for task in tasks]

    tables: Set[Rows] = set()
    deadlocks: List[Deadlock] = []
    partial = False
    explored = 0
    for rows, (found, stuck, cut_short, count) in zip(members, outcomes):
        tables |= found
        collection = DeliveredCollection(p.n, p.horizon, rows)
        deadlocks.extend(Deadlock(collection, rounds) for rounds in stuck)
        partial = partial or cut_short
        explored += count
    if partial:
        logger.warning(
            "scheduler budget of %d transitions exhausted; result is partial", budget
        )
    logger.debug(
        "enumerated %d heard-of collections over %d members (%d transitions)",
        len(tables),
        len(members),
        explored,
    )
    return EnumerationResult(
        n=p.n,
        horizon=p.horizon,
        collections=frozenset(HeardOfCollection(p.n, p.horizon, t) for t in tables),
        deadlocks=tuple(deadlocks),
        partial=partial,
        explored=explored,
    )
