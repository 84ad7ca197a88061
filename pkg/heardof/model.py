"""
Ground types of the heard-of model: processes, collections, messages, local states
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from heardof.errors import DimensionError, ParameterError, RoundRangeError

# A collection table: rows[r - 1][p] is the bitmask of senders for round r at process p
Rows = Tuple[Tuple[int, ...], ...]


def make_mask(indexes: Iterable[int]) -> int:
    value = 0
    for idx in indexes:
        value |= 1 << idx
    return value


def full_mask(n: int) -> int:
    return (1 << n) - 1


def iter_indexes(mask: int) -> Iterator[int]:
    index = 0
    while mask:
        if mask & 1:
            yield index
        mask >>= 1
        index += 1


def submasks(mask: int) -> Iterator[int]:
    """All submasks of `mask`, the empty one first"""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        # next submask in increasing order
        sub = (sub - mask) & mask


def masks_with_min_size(n: int, size: int) -> List[int]:
    """Every subset of the n-process universe with at least `size` members"""
    return [m for m in range(1 << n) if m.bit_count() >= size]


def process_name(index: int) -> str:
    return f"p{index + 1}"


def format_mask(mask: int) -> str:
    return "{" + ",".join(process_name(i) for i in iter_indexes(mask)) + "}"


def parse_process(name: str, n: int) -> int:
    """Parse a display name like 'p2' back into a 0-based index"""
    if not name.startswith("p") or not name[1:].isdigit():
        raise ParameterError(f"not a process name: {name!r}")
    index = int(name[1:]) - 1
    if not 0 <= index < n:
        raise ParameterError(f"process {name} outside a universe of {n}")
    return index


class ProcessId(int):
    """0-based process index displayed as p1..pn"""

    def __new__(cls, index: int) -> "ProcessId":
        if index < 0:
            raise ParameterError(f"process index must be nonnegative, got {index}")
        return super().__new__(cls, index)

    @property
    def index(self) -> int:
        return int(self)

    @property
    def name(self) -> str:
        return process_name(self)

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class ProcessSet:
    """An immutable set of processes stored as a bitmask"""

    bits: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise ParameterError(f"negative process bitmask {self.bits}")

    @classmethod
    def of(cls, *indexes: int) -> "ProcessSet":
        return cls(make_mask(indexes))

    @classmethod
    def universe(cls, n: int) -> "ProcessSet":
        return cls(full_mask(n))

    def __contains__(self, index: object) -> bool:
        return isinstance(index, int) and index >= 0 and bool(self.bits >> index & 1)

    def __iter__(self) -> Iterator[ProcessId]:
        return (ProcessId(i) for i in iter_indexes(self.bits))

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __and__(self, other: "ProcessSet") -> "ProcessSet":
        return ProcessSet(self.bits & other.bits)

    def __or__(self, other: "ProcessSet") -> "ProcessSet":
        return ProcessSet(self.bits | other.bits)

    def __sub__(self, other: "ProcessSet") -> "ProcessSet":
        return ProcessSet(self.bits & ~other.bits)

    def issubset(self, other: "ProcessSet") -> bool:
        return self.bits & ~other.bits == 0

    def issuperset(self, other: "ProcessSet") -> bool:
        return other.issubset(self)

    def fits(self, n: int) -> bool:
        """Whether every member lies in a universe of n processes"""
        return self.bits >> n == 0

    def to_json(self) -> List[int]:
        return list(iter_indexes(self.bits))

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "ProcessSet":
        return cls.of(*data)

    def __str__(self) -> str:
        return format_mask(self.bits)

    __repr__ = __str__


@dataclass(frozen=True)
class Collection:
    """Horizon-truncated table (round, process) -> set of senders"""

    n: int
    horizon: int
    rows: Rows

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"universe size must be positive, got {self.n}")
        if self.horizon < 1:
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if len(self.rows) != self.horizon:
            raise DimensionError(
                f"expected {self.horizon} rounds, got {len(self.rows)}"
            )
        universe = full_mask(self.n)
        for row in self.rows:
            if len(row) != self.n:
                raise DimensionError(f"expected {self.n} processes, got {len(row)}")
            for mask in row:
                if mask & ~universe:
                    raise DimensionError(
                        f"set {format_mask(mask)} exceeds a universe of {self.n}"
                    )

    @classmethod
    def total(cls, n: int, horizon: int):
        universe = full_mask(n)
        return cls(n, horizon, tuple((universe,) * n for _ in range(horizon)))

    @classmethod
    def from_sets(cls, n: int, horizon: int, sets: Sequence[Sequence[ProcessSet]]):
        return cls(n, horizon, tuple(tuple(s.bits for s in row) for row in sets))

    def _check_round(self, r: int) -> None:
        if not 1 <= r <= self.horizon:
            raise RoundRangeError(f"round {r} outside [1, {self.horizon}]")

    def mask(self, r: int, p: int) -> int:
        self._check_round(r)
        if not 0 <= p < self.n:
            raise RoundRangeError(f"process {p} outside a universe of {self.n}")
        return self.rows[r - 1][p]

    def get(self, r: int, p: int) -> ProcessSet:
        return ProcessSet(self.mask(r, p))

    def column(self, p: int, length: Optional[int] = None) -> Tuple[int, ...]:
        """The per-process prefix of `length` rounds"""
        if length is None:
            length = self.horizon
        return tuple(row[p] for row in self.rows[:length])

    def is_total(self) -> bool:
        universe = full_mask(self.n)
        return all(mask == universe for row in self.rows for mask in row)

    def truncate(self, horizon: int):
        if not 1 <= horizon <= self.horizon:
            raise RoundRangeError(f"cannot truncate {self.horizon} rounds to {horizon}")
        return type(self)(self.n, horizon, self.rows[:horizon])

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "horizon": self.horizon,
            "sets": [[list(iter_indexes(m)) for m in row] for row in self.rows],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]):
        try:
            n = int(data["n"])
            horizon = int(data["horizon"])
            rows = tuple(tuple(make_mask(s) for s in row) for row in data["sets"])
        except (KeyError, TypeError) as e:
            raise ParameterError(f"malformed collection JSON: {e}")
        return cls(n, horizon, rows)

    def __str__(self) -> str:
        lines = []
        for r, row in enumerate(self.rows, start=1):
            cells = " ".join(
                f"{process_name(p)}:{format_mask(m)}" for p, m in enumerate(row)
            )
            lines.append(f"r{r} {cells}")
        return "\n".join(lines)


class DeliveredCollection(Collection):
    """Which round-r messages are ever delivered to each process"""


class HeardOfCollection(Collection):
    """Which round-r messages each process received before leaving round r"""


@dataclass(frozen=True, order=True)
class Message:
    round: int
    sender: int

    def __post_init__(self):
        if self.round < 1:
            raise ParameterError(f"message round must be positive, got {self.round}")
        if self.sender < 0:
            raise ParameterError(f"negative sender index {self.sender}")

    def __str__(self) -> str:
        return f"<{self.round},{process_name(self.sender)}>"


@dataclass(frozen=True)
class LocalState:
    """A process's current round plus the messages it has received"""

    round: int = 1
    mes: FrozenSet[Message] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.round < 1:
            raise ParameterError(f"local state round must be positive, got {self.round}")
        if not isinstance(self.mes, frozenset):
            object.__setattr__(self, "mes", frozenset(self.mes))

    @classmethod
    def of(cls, round: int, *messages: Tuple[int, int]) -> "LocalState":
        """Build from (round, sender index) pairs"""
        return cls(round, frozenset(Message(r, k) for r, k in messages))

    def senders(self, r: int) -> int:
        """Bitmask of senders of the round-r messages held"""
        return make_mask(m.sender for m in self.mes if m.round == r)

    def heard(self, upto: int) -> Tuple[int, ...]:
        """Sender masks for rounds 1..upto"""
        masks = [0] * upto
        for m in self.mes:
            if m.round <= upto:
                masks[m.round - 1] |= 1 << m.sender
        return tuple(masks)

    def __str__(self) -> str:
        messages = ", ".join(str(m) for m in sorted(self.mes))
        return f"(round {self.round}, {{{messages}}})"


def kernel_mask(rows: Rows, r: int) -> int:
    value = -1
    for mask in rows[r - 1]:
        value &= mask
    return value


def kernel(c: Collection, r: int) -> ProcessSet:
    """Processes heard by everyone at round r"""
    c._check_round(r)
    return ProcessSet(kernel_mask(c.rows, r))


def obliv_view(q: LocalState) -> ProcessSet:
    return ProcessSet(q.senders(q.round))


def cons_view(q: LocalState) -> LocalState:
    return LocalState(q.round, frozenset(m for m in q.mes if m.round <= q.round))


def after_view(q: LocalState) -> ProcessSet:
    return ProcessSet(q.senders(q.round + 1))


def _check_same_shape(c1: Collection, c2: Collection) -> None:
    if c1.n != c2.n or c1.horizon != c2.horizon:
        raise DimensionError(
            f"shape mismatch: (n={c1.n}, R={c1.horizon}) vs (n={c2.n}, R={c2.horizon})"
        )


def combine_rows(a: Rows, b: Rows) -> Rows:
    return tuple(
        tuple(x & y for x, y in zip(row_a, row_b)) for row_a, row_b in zip(a, b)
    )


def combine_collections(c1: Collection, c2: Collection) -> Collection:
    """Pointwise intersection"""
    _check_same_shape(c1, c2)
    return type(c1)(c1.n, c1.horizon, combine_rows(c1.rows, c2.rows))


def concat_collections(
    c1: Collection, cut: int, c2: Collection, horizon: Optional[int] = None
) -> Collection:
    """
    Rounds 1..cut from c1, then c2 shifted so its round i becomes round cut + i.

    The result has `horizon` rounds (c1's horizon by default).
    """
    if horizon is None:
        horizon = c1.horizon
    if c1.n != c2.n:
        raise DimensionError(f"universe mismatch: {c1.n} vs {c2.n}")
    if not 0 <= cut <= c1.horizon:
        raise RoundRangeError(f"cut {cut} outside [0, {c1.horizon}]")
    if horizon < 1:
        raise ParameterError(f"horizon must be positive, got {horizon}")
    head = c1.rows[: min(cut, horizon)]
    needed = horizon - len(head)
    if needed > c2.horizon:
        raise DimensionError(
            f"second collection has {c2.horizon} rounds, {needed} needed after the cut"
        )
    return type(c1)(c1.n, horizon, head + c2.rows[:needed])


class Ordering(enum.Enum):
    """Deterministic order of simultaneous events"""

    FORWARD = "forward"
    REVERSED = "reversed"

    def arrange(self, items: Iterable, key=None) -> list:
        ordered = sorted(items, key=key)
        if self is Ordering.REVERSED:
            ordered.reverse()
        return ordered
