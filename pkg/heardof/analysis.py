"""
Heard-of predicates, heard-of products, bounds and domination checks
"""

from __future__ import annotations

import enum
import logging
import random
from itertools import product
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from heardof.config import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_SET_CAP
from heardof.errors import (
    DimensionError,
    EmptyPredicateError,
    EnumerationCapError,
    ParameterError,
    PreconditionError,
)
from heardof.expr import to_text
from heardof.model import (
    Collection,
    HeardOfCollection,
    ProcessSet,
    Rows,
    format_mask,
    full_mask,
    iter_indexes,
)
from heardof.predicates import (
    DeliveredPredicate,
    common_prefix_gap,
    common_round_gap,
    describe_gap,
)
from heardof.scheduler import EnumerationResult, enumerate_ho_bounded
from heardof.strategies import (
    ConservativeStrategy,
    ObliviousStrategy,
    Strategy,
    f_loss,
    minimal_conservative,
    minimal_oblivious,
    oblivious_valid_for,
)

logger = logging.getLogger(__name__)


class HeardOfPredicate:
    """
    A set of heard-of collections sharing (n, R).

    Products keep only their basis and materialize members on first use.
    """

    def __init__(
        self,
        n: int,
        horizon: int,
        tables: Optional[Iterable[Rows]] = None,
        generator: str = "literal",
        basis: Optional[FrozenSet[int]] = None,
    ):
        self.n = n
        self.horizon = horizon
        self.generator = generator
        self.basis = basis
        self._tables = frozenset(tables) if tables is not None else None
        if self._tables is None and basis is None:
            raise ParameterError("a heard-of predicate needs members or a basis")

    @property
    def tables(self) -> FrozenSet[Rows]:
        if self._tables is None:
            ordered = sorted(self.basis)
            slots = self.n * self.horizon
            self._tables = frozenset(
                tuple(
                    tuple(flat[r * self.n : (r + 1) * self.n])
                    for r in range(self.horizon)
                )
                for flat in product(ordered, repeat=slots)
            )
        return self._tables

    def __len__(self) -> int:
        if self._tables is None:
            return len(self.basis) ** (self.n * self.horizon)
        return len(self._tables)

    def __contains__(self, c: object) -> bool:
        if isinstance(c, Collection):
            if (c.n, c.horizon) != (self.n, self.horizon):
                return False
            rows = c.rows
        else:
            rows = c
        if self._tables is None:
            return all(mask in self.basis for row in rows for mask in row)
        return rows in self._tables

    def __iter__(self) -> Iterator[HeardOfCollection]:
        for rows in sorted(self.tables):
            yield HeardOfCollection(self.n, self.horizon, rows)

    def _check_shape(self, other: "HeardOfPredicate") -> None:
        if (self.n, self.horizon) != (other.n, other.horizon):
            raise DimensionError(
                f"shape mismatch: (n={self.n}, R={self.horizon}) vs "
                f"(n={other.n}, R={other.horizon})"
            )

    def issubset(self, other: "HeardOfPredicate") -> bool:
        return self.missing_from(other) is None

    def missing_from(self, other: "HeardOfPredicate") -> Optional[HeardOfCollection]:
        """The first member, in canonical order, that `other` lacks"""
        self._check_shape(other)
        if self.basis is not None and other.basis is not None and self._tables is None:
            extra = sorted(self.basis - other.basis)
            if not extra:
                return None
            # any table using the extra set is missing; pick the smallest one
            smallest = min(self.basis)
            flat = [smallest] * (self.n * self.horizon)
            flat[-1] = extra[0]
            return HeardOfCollection(
                self.n,
                self.horizon,
                tuple(tuple(flat[r * self.n : (r + 1) * self.n]) for r in range(self.horizon)),
            )
        for rows in sorted(self.tables):
            if rows not in other:
                return HeardOfCollection(self.n, self.horizon, rows)
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HeardOfPredicate):
            return NotImplemented
        if (self.n, self.horizon) != (other.n, other.horizon):
            return False
        if self.basis is not None and other.basis is not None:
            return self.basis == other.basis
        return len(self) == len(other) and self.issubset(other)

    __hash__ = None

    def to_json(self, members: bool = True) -> Dict[str, Any]:
        generator: Dict[str, Any] = {"kind": self.generator}
        if self.basis is not None:
            generator["basis"] = [list(iter_indexes(m)) for m in sorted(self.basis)]
        data: Dict[str, Any] = {
            "n": self.n,
            "horizon": self.horizon,
            "generator": generator,
            "size": len(self),
        }
        if members:
            data["collections"] = [c.to_json() for c in self]
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "HeardOfPredicate":
        try:
            n, horizon = int(data["n"]), int(data["horizon"])
            generator = data.get("generator", {})
            kind = generator.get("kind", "literal")
            basis = None
            if "basis" in generator:
                basis = frozenset(sum(1 << i for i in s) for s in generator["basis"])
            tables = None
            if "collections" in data:
                tables = [HeardOfCollection.from_json(c).rows for c in data["collections"]]
        except (KeyError, TypeError, AttributeError) as e:
            raise ParameterError(f"malformed heard-of predicate JSON: {e}")
        return cls(n, horizon, tables, kind, basis)


def ho_product(
    sets: Iterable[Union[ProcessSet, int]],
    n: int,
    horizon: int,
    cap: Optional[int] = None,
) -> HeardOfPredicate:
    """Every heard-of collection whose sets all belong to `sets`"""
    basis = frozenset(s.bits if isinstance(s, ProcessSet) else int(s) for s in sets)
    if not basis:
        raise EmptyPredicateError("heard-of product of an empty family")
    if any(m & ~full_mask(n) for m in basis):
        raise DimensionError(f"basis exceeds a universe of {n}")
    cap = DEFAULT_SET_CAP if cap is None else cap
    size = len(basis) ** (n * horizon)
    if size > cap:
        raise EnumerationCapError("heard-of product", size, cap)
    return HeardOfPredicate(n, horizon, generator="HOProd", basis=basis)


def enumerate_ho(
    f: Strategy,
    p: DeliveredPredicate,
    budget: Optional[int] = None,
    workers: int = 1,
) -> Tuple[HeardOfPredicate, EnumerationResult]:
    """Heard-of predicate generated by f on p, through the scheduler search"""
    result = enumerate_ho_bounded(f, p, budget=budget, workers=workers)
    ho = HeardOfPredicate(
        p.n, p.horizon, (c.rows for c in result.collections), generator="enumerated"
    )
    return ho, result


def generate_ho_oblivious(
    f: ObliviousStrategy, p: DeliveredPredicate, cap: Optional[int] = None
) -> HeardOfPredicate:
    """HO of a valid oblivious strategy on a predicate containing the total collection"""
    if not p.has_total():
        raise PreconditionError(
            f"predicate {to_text(p.expr)} does not contain the total collection"
        )
    if not oblivious_valid_for(f, p):
        raise PreconditionError(
            f"strategy is not valid for {to_text(p.expr)}: some delivered set is missing"
        )
    return ho_product(f.nexts, p.n, p.horizon, cap)


UPPER_BOUND_OPERATIONS = ("union", "succeed", "combine", "repeat")


def conservative_ho_upper_bound(
    f1c: ConservativeStrategy,
    f2c: Optional[ConservativeStrategy],
    op: str,
    p1: DeliveredPredicate,
    p2: Optional[DeliveredPredicate] = None,
    cap: Optional[int] = None,
) -> HeardOfPredicate:
    """
    Product bounding the heard-of predicate of composed minimal conservative
    strategies, built from their oblivious projections.
    """
    if op not in UPPER_BOUND_OPERATIONS:
        raise ParameterError(f"unknown operation {op!r}")
    operands = [p1] if op == "repeat" else [p1, p2]
    if any(p is None for p in operands) or (op != "repeat" and f2c is None):
        raise ParameterError(f"{op} needs two operands")
    for p in operands:
        if not p.has_total():
            raise PreconditionError(
                f"predicate {to_text(p.expr)} does not contain the total collection"
            )
    first = f1c.oblivious_projection().nexts
    if op == "repeat":
        basis = first
    else:
        second = f2c.oblivious_projection().nexts
        if op == "combine":
            basis = frozenset(a & b for a in first for b in second)
        else:
            basis = first | second
    return ho_product(basis, p1.n, p1.horizon, cap)


# Reports


class Verdict(str, enum.Enum):
    HOLDS = "holds-at-horizon"
    FAILS = "fails"
    PARTIAL = "partial-budget"
    # no sufficient condition applies; nothing is refuted
    NO_CONDITION = "no-condition"


class TheoremReport(BaseModel):
    """Outcome of one check on one instance"""

    model_config = ConfigDict(extra="forbid")

    theorem: str
    params: Dict[str, Any] = Field(default_factory=dict)
    verdict: Verdict
    # which kind of evidence produced the verdict
    tier: str = "exact"
    witness: Optional[Dict[str, Any]] = None
    notes: List[str] = Field(default_factory=list)
    elapsed_ms: Optional[int] = None

    @model_validator(mode="after")
    def _failures_carry_witness(self) -> "TheoremReport":
        if self.verdict is Verdict.FAILS and self.witness is None:
            raise ValueError(f"failing report {self.theorem} without a counterexample")
        return self

    @property
    def ok(self) -> bool:
        return self.verdict is not Verdict.FAILS

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude_none=True)


def predicate_params(p: DeliveredPredicate, **extra: Any) -> Dict[str, Any]:
    params = {"n": p.n, "horizon": p.horizon, "expr": to_text(p.expr)}
    params.update(extra)
    return params


def _ho_of_oblivious(
    f: ObliviousStrategy, p: DeliveredPredicate, budget: Optional[int]
) -> Tuple[HeardOfPredicate, bool]:
    """HO of an oblivious strategy, and whether the scheduler search was cut short"""
    if p.has_total() and oblivious_valid_for(f, p):
        return generate_ho_oblivious(f, p), False
    ho, result = enumerate_ho(f, p, budget)
    return ho, result.partial


def check_family_domination(
    p: DeliveredPredicate,
    family: str,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    budget: Optional[int] = None,
    limit: int = 1 << 12,
) -> TheoremReport:
    """
    Compare the minimal strategy of a family with valid strategies of the same
    family. Valid oblivious strategies are the supersets of the minimal Nexts;
    they are all checked when there are at most `limit` of them, else sampled.
    Conservative supersets are always sampled.
    """
    if family in ("obliv", "oblivious"):
        return _oblivious_domination(p, samples, seed, budget, limit)
    if family in ("cons", "conservative"):
        return _conservative_domination(p, samples, seed, budget)
    raise ParameterError(f"unknown strategy family {family!r}")


def _random_superset(
    base: FrozenSet, extras: List, rng: random.Random
) -> FrozenSet:
    return base | frozenset(x for x in extras if rng.random() < 0.5)


def _oblivious_domination(
    p: DeliveredPredicate, samples: int, seed: int, budget: Optional[int], limit: int
) -> TheoremReport:
    f_min = minimal_oblivious(p)
    extras = [m for m in range(1 << p.n) if m not in f_min.nexts]
    count = 1 << len(extras)
    if count <= limit:
        candidates = [
            f_min.nexts | frozenset(x for i, x in enumerate(extras) if bits >> i & 1)
            for bits in range(count)
        ]
        tier = "exact"
    else:
        rng = random.Random(seed)
        candidates = [_random_superset(f_min.nexts, extras, rng) for _ in range(samples)]
        tier = "sampled"
    params = predicate_params(p, family="oblivious", strategies=len(candidates))
    ho_min, partial = _ho_of_oblivious(f_min, p, budget)
    for nexts in candidates:
        f = ObliviousStrategy(p.n, nexts)
        ho_f, cut = _ho_of_oblivious(f, p, budget)
        partial = partial or cut
        missing = ho_min.missing_from(ho_f)
        if missing is not None:
            return TheoremReport(
                theorem="family-domination",
                params=params,
                verdict=Verdict.FAILS,
                tier=tier,
                witness={"strategy": f.to_json(), "collection": missing.to_json()},
            )
    verdict = Verdict.PARTIAL if partial else Verdict.HOLDS
    notes = [] if tier == "exact" else [f"sampled {len(candidates)} of {count} valid strategies"]
    return TheoremReport(
        theorem="family-domination",
        params=params,
        verdict=verdict,
        tier=tier,
        notes=notes,
    )


def _all_prefixes(n: int, horizon: int) -> List[Tuple[int, ...]]:
    prefixes = []
    for length in range(1, horizon + 1):
        prefixes.extend(product(range(1 << n), repeat=length))
    return prefixes


def _conservative_domination(
    p: DeliveredPredicate, samples: int, seed: int, budget: Optional[int]
) -> TheoremReport:
    f_min = minimal_conservative(p)
    extras = [x for x in _all_prefixes(p.n, p.horizon) if x not in f_min.nexts_c]
    rng = random.Random(seed)
    # a few extra prefixes per sample keep each enumeration small
    candidates = [
        f_min.nexts_c | frozenset(rng.sample(extras, min(len(extras), rng.randint(1, 3))))
        for _ in range(samples)
    ]
    params = predicate_params(p, family="conservative", strategies=len(candidates))
    ho_min, result = enumerate_ho(f_min, p, budget)
    partial = result.partial
    for nexts_c in candidates:
        f = ConservativeStrategy(p.n, p.horizon, nexts_c)
        ho_f, res = enumerate_ho(f, p, budget)
        partial = partial or res.partial
        missing = ho_min.missing_from(ho_f)
        if missing is not None:
            return TheoremReport(
                theorem="family-domination",
                params=params,
                verdict=Verdict.FAILS,
                tier="sampled",
                witness={
                    "strategy_prefixes": len(nexts_c),
                    "collection": missing.to_json(),
                },
            )
    return TheoremReport(
        theorem="family-domination",
        params=params,
        verdict=Verdict.PARTIAL if partial else Verdict.HOLDS,
        tier="sampled",
        notes=[f"sampled {len(candidates)} supersets of the minimal prefixes"],
    )


def compare_families(p: DeliveredPredicate, budget: Optional[int] = None) -> TheoremReport:
    """Minimal conservative HO against minimal oblivious HO on the same predicate"""
    ho_cons, result = enumerate_ho(minimal_conservative(p), p, budget)
    ho_obl, cut = _ho_of_oblivious(minimal_oblivious(p), p, budget)
    params = predicate_params(p, conservative=len(ho_cons), oblivious=len(ho_obl))
    if result.partial or cut:
        return TheoremReport(
            theorem="family-comparison", params=params, verdict=Verdict.PARTIAL
        )
    missing = ho_cons.missing_from(ho_obl)
    if missing is not None:
        return TheoremReport(
            theorem="family-comparison",
            params=params,
            verdict=Verdict.FAILS,
            witness={"conservative_only": missing.to_json()},
        )
    extra = ho_obl.missing_from(ho_cons)
    witness = None if extra is None else {"oblivious_only": extra.to_json()}
    params["strict"] = extra is not None
    return TheoremReport(
        theorem="family-comparison", params=params, verdict=Verdict.HOLDS, witness=witness
    )


def floss_comparison(
    p: DeliveredPredicate, budget: Optional[int] = None
) -> Optional[Dict[str, Any]]:
    """HO of f_loss against the minimal oblivious HO, when f_loss never blocks on p"""
    if p.n < 2:
        return None
    ho_loss, result = enumerate_ho(f_loss(p.n), p, budget)
    if result.deadlocks or result.partial:
        return None
    ho_obl, cut = _ho_of_oblivious(minimal_oblivious(p), p, budget)
    if cut:
        return None
    extra = ho_obl.missing_from(ho_loss)
    return {
        "f_loss": len(ho_loss),
        "oblivious": len(ho_obl),
        "contained": ho_loss.issubset(ho_obl),
        "strict": extra is not None,
        "oblivious_only": None if extra is None else extra.to_json(),
    }


def check_global_domination_evidence(
    p: DeliveredPredicate, budget: Optional[int] = None
) -> TheoremReport:
    """Report which sufficient condition for domination the predicate satisfies"""
    params = predicate_params(p)
    round_gap = common_round_gap(p)
    if round_gap is None:
        f_min = minimal_oblivious(p)
        return TheoremReport(
            theorem="domination-evidence",
            params=params,
            verdict=Verdict.HOLDS,
            tier="certificate",
            witness={
                "certificate": "common-round",
                "dominating": "oblivious",
                "nexts": [format_mask(m) for m in sorted(f_min.nexts)],
            },
        )
    prefix_gap = common_prefix_gap(p)
    if prefix_gap is None:
        f_min = minimal_conservative(p)
        return TheoremReport(
            theorem="domination-evidence",
            params=params,
            verdict=Verdict.HOLDS,
            tier="certificate",
            witness={
                "certificate": "common-prefix",
                "dominating": "conservative",
                "prefixes": len(f_min.nexts_c),
            },
        )
    witness: Dict[str, Any] = {
        "certificate": "none",
        "common_round_gap": describe_gap(round_gap),
        "common_prefix_gap": describe_gap(prefix_gap),
    }
    notes = ["no sufficient condition for oblivious or conservative domination applies"]
    comparison = floss_comparison(p, budget)
    if comparison is not None:
        witness["f_loss"] = comparison
        notes.append("f_loss domination is an unverified conjecture")
    return TheoremReport(
        theorem="domination-evidence",
        params=params,
        verdict=Verdict.NO_CONDITION,
        tier="certificate",
        witness=witness,
        notes=notes,
    )


def deficiency_set(n: int, horizon: int, cap: Optional[int] = None) -> HeardOfPredicate:
    """Heard-of collections missing at most one message per round, over all processes"""
    universe = full_mask(n)
    near = [universe] + [universe & ~(1 << k) for k in range(n)]
    tables = [
        rows
        for rows in ho_product(near, n, horizon, cap).tables
        if all(sum(n - m.bit_count() for m in row) <= 1 for row in rows)
    ]
    return HeardOfPredicate(n, horizon, tables, generator="enumerated")


def floss_characterization(
    n: int, horizon: int, cap: Optional[int] = None
) -> HeardOfPredicate:
    """
    Heard-of collections f_loss generates on at most one loss: at most one
    message missing per round, and a process short at round r < R hears every
    other process at round r + 1.
    """
    universe = full_mask(n)

    def caught_up(rows: Rows) -> bool:
        for r in range(horizon - 1):
            for j in range(n):
                others = universe & ~(1 << j)
                if rows[r][j] != universe and rows[r + 1][j] & others != others:
                    return False
        return True

    base = deficiency_set(n, horizon, cap)
    return HeardOfPredicate(
        n, horizon, [rows for rows in base.tables if caught_up(rows)], generator="enumerated"
    )
