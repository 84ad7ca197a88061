"""
Execution traces: well-formedness, local states, standard and canonical
constructions, and heard-of extraction
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple, Union

from heardof.errors import (
    DimensionError,
    DomainError,
    IncompleteTraceError,
    ParameterError,
    RoundRangeError,
)
from heardof.model import (
    Collection,
    HeardOfCollection,
    LocalState,
    Message,
    Ordering,
    full_mask,
    iter_indexes,
    parse_process,
    process_name,
)
from heardof.strategies import Strategy

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Deliver:
    round: int
    sender: int
    receiver: int

    def to_text(self) -> str:
        return f"D {self.round} {process_name(self.sender)} {process_name(self.receiver)}"

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": "deliver",
            "round": self.round,
            "sender": self.sender,
            "receiver": self.receiver,
        }


@dataclass(frozen=True, order=True)
class Next:
    process: int

    def to_text(self) -> str:
        return f"N {process_name(self.process)}"

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "next", "process": self.process}


@dataclass(frozen=True)
class Stop:
    def to_text(self) -> str:
        return "S"

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "stop"}


Event = Union[Deliver, Next, Stop]


@dataclass(frozen=True)
class Execution:
    """A finite prefix of an execution over a universe of n processes"""

    n: int
    horizon: int
    events: Tuple[Event, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def nexts(self, p: int) -> int:
        return sum(1 for e in self.events if isinstance(e, Next) and e.process == p)

    def to_text(self) -> str:
        return "\n".join(e.to_text() for e in self.events)

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "horizon": self.horizon,
            "events": [e.to_json() for e in self.events],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Execution":
        events: List[Event] = []
        try:
            for item in data["events"]:
                kind = item["kind"]
                if kind == "deliver":
                    events.append(
                        Deliver(int(item["round"]), int(item["sender"]), int(item["receiver"]))
                    )
                elif kind == "next":
                    events.append(Next(int(item["process"])))
                elif kind == "stop":
                    events.append(Stop())
                else:
                    raise ParameterError(f"unknown event kind {kind!r}")
            return cls(int(data["n"]), int(data["horizon"]), tuple(events))
        except (KeyError, TypeError) as e:
            raise ParameterError(f"malformed trace JSON: {e}")


def parse_trace(text: str, n: int, horizon: int) -> Execution:
    """Parse the one-event-per-line text form (`D r pk pj`, `N pj`, `S`); `#` starts a comment"""
    events: List[Event] = []
    for number, line in enumerate(text.splitlines(), start=1):
        fields = line.split("#", 1)[0].split()
        if not fields:
            continue
        try:
            if fields[0] == "D" and len(fields) == 4:
                events.append(
                    Deliver(int(fields[1]), parse_process(fields[2], n), parse_process(fields[3], n))
                )
            elif fields[0] == "N" and len(fields) == 2:
                events.append(Next(parse_process(fields[1], n)))
            elif fields == ["S"]:
                events.append(Stop())
            else:
                raise ParameterError(f"cannot read event {line.strip()!r}")
        except (ParameterError, ValueError) as e:
            raise ParameterError(f"line {number}: {e}")
    return Execution(n, horizon, tuple(events))


@dataclass(frozen=True)
class Violation:
    """Index of the first offending event (len(trace) for end-of-trace rules)"""

    index: int
    reason: str

    def to_json(self) -> Dict[str, Any]:
        return {"index": self.index, "reason": self.reason}


def first_violation(t: Execution) -> Optional[Violation]:
    """Check delivery after sending, unique delivery, and once stopped forever stopped"""
    nexts = [0] * t.n
    delivered: Set[Tuple[int, int, int]] = set()
    stopped = False
    for i, event in enumerate(t.events):
        if stopped and not isinstance(event, Stop):
            return Violation(i, "event after stop")
        if isinstance(event, Stop):
            stopped = True
        elif isinstance(event, Next):
            if not 0 <= event.process < t.n:
                return Violation(i, f"unknown process index {event.process}")
            nexts[event.process] += 1
        else:
            if not (0 <= event.sender < t.n and 0 <= event.receiver < t.n):
                return Violation(i, "unknown process index in delivery")
            if event.round < 1:
                return Violation(i, f"delivery of round {event.round}")
            if nexts[event.sender] < event.round - 1:
                return Violation(
                    i,
                    f"{process_name(event.sender)} has not sent its round "
                    f"{event.round} message",
                )
            key = (event.round, event.sender, event.receiver)
            if key in delivered:
                return Violation(i, f"duplicate delivery {event.to_text()}")
            delivered.add(key)
    return None


def validate_execution(t: Execution) -> bool:
    return first_violation(t) is None


def local_state(t: Execution, p: int, i: int) -> LocalState:
    """State of p just before event i"""
    if not 0 <= i <= len(t.events):
        raise RoundRangeError(f"index {i} outside [0, {len(t.events)}]")
    round = 1
    mes = set()
    for event in t.events[:i]:
        if isinstance(event, Next) and event.process == p:
            round += 1
        elif isinstance(event, Deliver) and event.receiver == p:
            mes.add(Message(event.round, event.sender))
    return LocalState(round, frozenset(mes))


def collection_violation(t: Execution, c: Collection) -> Optional[Violation]:
    if (t.n, t.horizon) != (c.n, c.horizon):
        raise DimensionError(
            f"trace (n={t.n}, R={t.horizon}) vs collection (n={c.n}, R={c.horizon})"
        )
    broken = first_violation(t)
    if broken is not None:
        return broken
    nexts = [t.nexts(p) for p in range(t.n)]
    delivered = set()
    for i, event in enumerate(t.events):
        if not isinstance(event, Deliver):
            continue
        r, k, j = event.round, event.sender, event.receiver
        if r > c.horizon + 1:
            return Violation(i, f"delivery past round {c.horizon + 1}")
        if r <= c.horizon and not c.rows[r - 1][j] >> k & 1:
            return Violation(i, f"{event.to_text()} is not in the collection")
        delivered.add((r, k, j))
    for r in range(1, c.horizon + 1):
        for j in range(c.n):
            for k in iter_indexes(c.rows[r - 1][j]):
                if nexts[k] >= r - 1 and (r, k, j) not in delivered:
                    return Violation(
                        len(t.events),
                        f"missing delivery D {r} {process_name(k)} {process_name(j)}",
                    )
    return None


def is_execution_of_collection(t: Execution, c: Collection) -> bool:
    return collection_violation(t, c) is None


def _heard_table(t: Execution, extra: int) -> List[List[int]]:
    size = max([t.horizon, len(t.events)] + [
        e.round for e in t.events if isinstance(e, Deliver)
    ]) + extra + 2
    return [[0] * size for _ in range(t.n)]


def strategy_violation(t: Execution, f: Strategy) -> Optional[Violation]:
    """Every next happens from a state in f, and no process ends in f short of R rounds"""
    if t.n != f.n:
        raise DimensionError(f"trace over {t.n} processes, strategy over {f.n}")
    rounds = [1] * t.n
    heard = _heard_table(t, f.lookahead)
    for i, event in enumerate(t.events):
        if isinstance(event, Deliver):
            heard[event.receiver][event.round - 1] |= 1 << event.sender
        elif isinstance(event, Next):
            p = event.process
            r = rounds[p]
            if not f.accepts(r, heard[p][: r + f.lookahead]):
                return Violation(
                    i, f"{process_name(p)} changes round {r} from a state outside the strategy"
                )
            rounds[p] += 1
    for p in range(t.n):
        r = rounds[p]
        if r <= t.horizon and f.accepts(r, heard[p][: r + f.lookahead]):
            return Violation(
                len(t.events),
                f"fairness: {process_name(p)} ends in the strategy after {r - 1} "
                f"of {t.horizon} rounds",
            )
    return None


def is_execution_of_strategy(t: Execution, f: Strategy) -> bool:
    return strategy_violation(t, f) is None


def extract_heardof(t: Execution) -> HeardOfCollection:
    """ho(r, p) = senders of round-r messages p holds at its r-th next"""
    rounds = [0] * t.n
    heard = _heard_table(t, 0)
    rows = [[0] * t.n for _ in range(t.horizon)]
    for event in t.events:
        if isinstance(event, Deliver):
            heard[event.receiver][event.round - 1] |= 1 << event.sender
        elif isinstance(event, Next):
            p = event.process
            rounds[p] += 1
            if rounds[p] <= t.horizon:
                rows[rounds[p] - 1][p] = heard[p][rounds[p] - 1]
    for p in range(t.n):
        if rounds[p] < t.horizon:
            raise IncompleteTraceError(p, rounds[p], t.horizon)
    return HeardOfCollection(t.n, t.horizon, tuple(tuple(row) for row in rows))


def _deliveries(
    items: Iterable[Tuple[int, int, int]], ordering: Ordering
) -> List[Deliver]:
    return [Deliver(*item) for item in ordering.arrange(set(items))]


def standard_execution(
    f: Strategy, c: Collection, ordering: Ordering = Ordering.FORWARD
) -> Execution:
    """
    Deliver every pending message, then let every process whose state is in f
    change round; stop when nobody can.
    """
    if f.n != c.n:
        raise DimensionError(f"strategy over {f.n} processes, collection over {c.n}")
    n, horizon = c.n, c.horizon
    events: List[Event] = []
    done = [0] * n
    heard = [[0] * (horizon + 2) for _ in range(n)]

    def sent_by(k: int, r: int) -> List[Tuple[int, int, int]]:
        if r <= horizon:
            return [(r, k, j) for j in range(n) if c.rows[r - 1][j] >> k & 1]
        if r == horizon + 1 and f.lookahead:
            return [(r, k, j) for j in range(n)]
        return []

    pending = [item for k in range(n) for item in sent_by(k, 1)]
    while True:
        for event in _deliveries(pending, ordering):
            events.append(event)
            heard[event.receiver][event.round - 1] |= 1 << event.sender
        movers = [
            j
            for j in ordering.arrange(range(n))
            if done[j] < horizon
            and f.accepts(done[j] + 1, heard[j][: done[j] + 1 + f.lookahead])
        ]
        if not movers:
            if any(d < horizon for d in done):
                events.append(Stop())
            break
        pending = []
        for j in movers:
            events.append(Next(j))
            done[j] += 1
            pending.extend(sent_by(j, done[j] + 1))
    logger.debug("standard execution: %d events, rounds %s", len(events), done)
    return Execution(n, horizon, tuple(events))


def _check_heardof(ho: Collection) -> None:
    if not isinstance(ho, Collection):
        raise ParameterError(f"expected a heard-of collection, got {type(ho).__name__}")


def canonical_execution(
    ho: Collection, ordering: Ordering = Ordering.FORWARD
) -> Execution:
    """
    Deliver the heard-of messages of each round before everybody changes round;
    leftovers arrive one round late, the last round's in a trailing phase.
    """
    _check_heardof(ho)
    n, horizon = ho.n, ho.horizon
    universe = full_mask(n)
    events: List[Event] = []
    for r in range(1, horizon + 2):
        items = set()
        if r <= horizon:
            items |= {(r, k, j) for j in range(n) for k in iter_indexes(ho.rows[r - 1][j])}
        if r > 1:
            row = ho.rows[r - 2]
            items |= {(r - 1, k, j) for j in range(n) for k in iter_indexes(universe & ~row[j])}
        events.extend(_deliveries(items, ordering))
        if r <= horizon:
            events.extend(Next(j) for j in ordering.arrange(range(n)))
    return Execution(n, horizon, tuple(events))


def round_deficiency(ho: Collection, r: int) -> int:
    """Messages missing on time at round r, over every process"""
    return sum(ho.n - mask.bit_count() for mask in ho.rows[r - 1])


def shifted_canonical_execution(
    ho: Collection, ordering: Ordering = Ordering.FORWARD
) -> Execution:
    """
    Canonical execution where a process missing a message at round r changes
    round only after receiving the next-round messages of every other process.
    """
    _check_heardof(ho)
    n, horizon = ho.n, ho.horizon
    universe = full_mask(n)
    for r in range(1, horizon + 1):
        missing = round_deficiency(ho, r)
        if missing > 1:
            raise DomainError(
                f"round {r} misses {missing} messages; at most one is allowed"
            )
    # a short process changes round only once every other process reached r + 1
    for r in range(1, horizon):
        for j in range(n):
            others = universe & ~(1 << j)
            if ho.rows[r - 1][j] != universe and ho.rows[r][j] & others != others:
                raise DomainError(
                    f"p{j + 1} misses a message at round {r} but does not hear every "
                    f"other process at round {r + 1}"
                )
    events: List[Event] = []
    early: Set[Tuple[int, int, int]] = set()
    for r in range(1, horizon + 2):
        items = set()
        if r <= horizon:
            items |= {(r, k, j) for j in range(n) for k in iter_indexes(ho.rows[r - 1][j])}
        if r > 1:
            row = ho.rows[r - 2]
            items |= {(r - 1, k, j) for j in range(n) for k in iter_indexes(universe & ~row[j])}
        events.extend(_deliveries(items - early, ordering))
        if r > horizon:
            break
        short = [j for j in range(n) if ho.rows[r - 1][j] != universe]
        events.extend(Next(j) for j in ordering.arrange(range(n)) if j not in short)
        for j in short:
            ahead = {(r + 1, k, j) for k in range(n) if k != j}
            events.extend(_deliveries(ahead, ordering))
            early |= ahead
            events.append(Next(j))
    return Execution(n, horizon, tuple(events))
