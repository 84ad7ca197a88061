"""
Theorem-check suite: exact finite verification of the heard-of results at a
fixed horizon, with machine-readable reports
"""

from __future__ import annotations

import json
import logging
import random
import time
from itertools import combinations_with_replacement, product
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from heardof.analysis import (
    HeardOfPredicate,
    TheoremReport,
    Verdict,
    check_family_domination,
    check_global_domination_evidence,
    compare_families,
    conservative_ho_upper_bound,
    deficiency_set,
    enumerate_ho,
    floss_comparison,
    floss_characterization,
    ho_product,
    predicate_params,
)
from heardof.config import (
    DEFAULT_HORIZON,
    DEFAULT_N,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_SET_CAP,
)
from heardof.errors import DomainError, EnumerationCapError, HeardOfError
from heardof.expr import to_text
from heardof.executions import (
    canonical_execution,
    collection_violation,
    extract_heardof,
    first_violation,
    shifted_canonical_execution,
    standard_execution,
    strategy_violation,
)
from heardof.model import DeliveredCollection, Ordering, format_mask, masks_with_min_size
from heardof.parser import parse_expr
from heardof.predicates import (
    DeliveredPredicate,
    build_crashF,
    build_expr,
    combine_pred,
    has_common_prefix,
    has_common_round,
    is_prefix_symmetric,
    is_round_symmetric,
    repeat_pred,
    succeed_pred,
    union_pred,
)
from heardof.strategies import (
    ConservativeStrategy,
    ObliviousStrategy,
    Strategy,
    conservative_valid_for,
    f_loss,
    f_n_minus_F,
    minimal_conservative,
    minimal_oblivious,
    oblivious_valid_for,
    strat_combine,
    strat_repeat,
    strat_succeed,
    strat_union,
)

logger = logging.getLogger(__name__)

# Predicate roles a suite run can override, for fault injection
ROLES = ("crash", "loss", "late_crash")


class SuiteConfig(BaseModel):
    """Instance sizes, guardrails and overrides for one suite run"""

    model_config = ConfigDict(extra="forbid")

    n: int = DEFAULT_N
    horizon: int = DEFAULT_HORIZON
    faults: int = 1
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    budget: Optional[int] = None
    cap: Optional[int] = None
    set_cap: int = DEFAULT_SET_CAP
    workers: int = 1
    ordering: Ordering = Ordering.FORWARD
    timings: bool = False
    checks: Optional[List[str]] = None
    overrides: Dict[str, str] = Field(default_factory=dict)

    @field_validator("n", "horizon", "samples", "workers", "set_cap")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @field_validator("faults")
    @classmethod
    def _nonnegative(cls, value: int) -> int:
        if value < 0:
            raise ValueError(f"must be nonnegative, got {value}")
        return value

    @field_validator("checks")
    @classmethod
    def _known_checks(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is not None:
            unknown = sorted(set(value) - set(CHECKS))
            if unknown:
                raise ValueError(f"unknown checks: {', '.join(unknown)}")
        return value

    @field_validator("overrides")
    @classmethod
    def _known_roles(cls, value: Dict[str, str]) -> Dict[str, str]:
        unknown = sorted(set(value) - set(ROLES))
        if unknown:
            raise ValueError(f"unknown predicate roles: {', '.join(unknown)}")
        return value

    def expression(self, role: str) -> str:
        defaults = {
            "crash": f"crash({self.faults})",
            "loss": "loss(1)",
            "late_crash": f"crash1@{self.horizon}",
        }
        return self.overrides.get(role, defaults[role])

    def params(self) -> Dict[str, Any]:
        """Parameters echoed in reports; the delivery ordering is left out"""
        data = self.model_dump(
            mode="json", exclude={"ordering", "timings", "checks", "workers"}
        )
        data["overrides"] = dict(sorted(self.overrides.items()))
        return data


class SuiteReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: Dict[str, Any]
    reports: List[TheoremReport]

    @property
    def failures(self) -> List[TheoremReport]:
        return [r for r in self.reports if r.verdict is Verdict.FAILS]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def summary(self) -> Dict[str, int]:
        counts = {verdict.value: 0 for verdict in Verdict}
        for report in self.reports:
            counts[report.verdict.value] += 1
        return counts

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "reports": [r.to_json_dict() for r in self.reports],
            "summary": self.summary(),
        }


class SweepReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    runs: List[SuiteReport]
    differences: List[Dict[str, Any]]

    @property
    def exit_code(self) -> int:
        return max((run.exit_code for run in self.runs), default=0)

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "runs": [run.to_json_dict() for run in self.runs],
            "differences": self.differences,
        }


class SuiteContext:
    """Shared state of a suite run: built predicates are cached by expression"""

    def __init__(self, config: SuiteConfig):
        self.config = config
        self.n = config.n
        self.horizon = config.horizon
        self._built: Dict[Tuple[str, int, int], DeliveredPredicate] = {}

    def build(self, text: str, n: Optional[int] = None, horizon: Optional[int] = None):
        n = self.n if n is None else n
        horizon = self.horizon if horizon is None else horizon
        key = (text, n, horizon)
        if key not in self._built:
            self._built[key] = build_expr(parse_expr(text), n, horizon, self.config.cap)
        return self._built[key]

    def role(self, name: str) -> DeliveredPredicate:
        return self.build(self.config.expression(name))

    def enumerate(self, f: Strategy, p: DeliveredPredicate):
        return enumerate_ho(f, p, budget=self.config.budget, workers=self.config.workers)

    def pool(self) -> List[str]:
        """Small predicates combined pairwise by the composition checks"""
        texts = [self.config.expression("crash"), "crash1@1", f"crash1@{self.horizon}", "total"]
        return list(dict.fromkeys(texts))


def _holds(theorem: str, params: Dict[str, Any], **extra: Any) -> TheoremReport:
    return TheoremReport(theorem=theorem, params=params, verdict=Verdict.HOLDS, **extra)


def _fails(theorem: str, params: Dict[str, Any], witness: Dict[str, Any], **extra: Any):
    return TheoremReport(
        theorem=theorem, params=params, verdict=Verdict.FAILS, witness=witness, **extra
    )


def _partial(theorem: str, params: Dict[str, Any], note: str) -> TheoremReport:
    return TheoremReport(
        theorem=theorem, params=params, verdict=Verdict.PARTIAL, notes=[note]
    )


def _set_equality(
    theorem: str,
    params: Dict[str, Any],
    found: HeardOfPredicate,
    expected: HeardOfPredicate,
) -> TheoremReport:
    extra = found.missing_from(expected)
    if extra is not None:
        return _fails(theorem, params, {"unexpected": extra.to_json()})
    missing = expected.missing_from(found)
    if missing is not None:
        return _fails(theorem, params, {"missing": missing.to_json()})
    return _holds(theorem, params, notes=["equality at the horizon"])


# Checks


def check_fnf_characterization(ctx: SuiteContext) -> List[TheoremReport]:
    p = ctx.role("crash")
    faults = ctx.config.faults
    params = predicate_params(p, faults=faults)
    f = f_n_minus_F(ctx.n, faults)
    ho, result = ctx.enumerate(f, p)
    if result.deadlocks:
        return [_fails("fnf-characterization", params, {"deadlock": result.deadlocks[0].to_json()})]
    if result.partial:
        return [_partial("fnf-characterization", params, "scheduler budget exhausted")]
    expected = ho_product(masks_with_min_size(ctx.n, ctx.n - faults), ctx.n, ctx.horizon, ctx.config.set_cap)
    params["size"] = len(expected)
    return [_set_equality("fnf-characterization", params, ho, expected)]


def _stuck_member(f: Strategy, p: DeliveredPredicate, ordering: Ordering):
    """A member whose standard execution blocks, as a validity counterexample"""
    for c in p:
        t = standard_execution(f, c, ordering)
        if any(t.nexts(j) < p.horizon for j in range(p.n)):
            return c, t
    return None


def check_oblivious_validity(ctx: SuiteContext) -> List[TheoremReport]:
    p = ctx.role("crash")
    f = f_n_minus_F(ctx.n, ctx.config.faults)
    params = predicate_params(p, strategy="f_n_minus_F")
    if not oblivious_valid_for(f, p):
        return [_fails("oblivious-validity-criterion", params, {"reason": "criterion rejects f_n_minus_F"})]
    _, result = ctx.enumerate(f, p)
    if result.deadlocks:
        return [_fails("oblivious-validity-criterion", params, {"deadlock": result.deadlocks[0].to_json()})]
    delivered = sorted(minimal_oblivious(p).nexts & f.nexts)
    for mask in delivered:
        weaker = ObliviousStrategy(ctx.n, f.nexts - {mask})
        if oblivious_valid_for(weaker, p):
            return [_fails("oblivious-validity-criterion", params, {"removed": format_mask(mask), "reason": "criterion still accepts"})]
        if _stuck_member(weaker, p, ctx.config.ordering) is None:
            return [_fails("oblivious-validity-criterion", params, {"removed": format_mask(mask), "reason": "no blocked standard execution"})]
    params["removals"] = len(delivered)
    verdict = Verdict.PARTIAL if result.partial else Verdict.HOLDS
    return [TheoremReport(theorem="oblivious-validity-criterion", params=params, verdict=verdict)]


def check_conservative_validity(ctx: SuiteContext) -> List[TheoremReport]:
    p = ctx.role("late_crash")
    f = minimal_conservative(p)
    params = predicate_params(p, strategy="minimal conservative")
    if not conservative_valid_for(f, p):
        return [_fails("conservative-validity-criterion", params, {"reason": "criterion rejects the minimal strategy"})]
    _, result = ctx.enumerate(f, p)
    if result.deadlocks:
        return [_fails("conservative-validity-criterion", params, {"deadlock": result.deadlocks[0].to_json()})]
    for prefix in sorted(f.nexts_c):
        weaker = ConservativeStrategy(ctx.n, f.horizon, f.nexts_c - {prefix})
        shown = [format_mask(m) for m in prefix]
        if conservative_valid_for(weaker, p):
            return [_fails("conservative-validity-criterion", params, {"removed": shown, "reason": "criterion still accepts"})]
        if _stuck_member(weaker, p, ctx.config.ordering) is None:
            return [_fails("conservative-validity-criterion", params, {"removed": shown, "reason": "no blocked standard execution"})]
    params["removals"] = len(f.nexts_c)
    verdict = Verdict.PARTIAL if result.partial else Verdict.HOLDS
    return [TheoremReport(theorem="conservative-validity-criterion", params=params, verdict=verdict)]


def _random_strategy(rng: random.Random, p: DeliveredPredicate) -> Strategy:
    if rng.random() < 0.5:
        masks = [m for m in range(1 << p.n) if rng.random() < 0.5]
        return ObliviousStrategy(p.n, frozenset(masks))
    prefixes = [
        prefix
        for length in range(1, p.horizon + 1)
        for prefix in product(range(1 << p.n), repeat=length)
        if rng.random() < 0.5
    ]
    return ConservativeStrategy(p.n, p.horizon, frozenset(prefixes))


def check_standard_execution(ctx: SuiteContext) -> List[TheoremReport]:
    rng = random.Random(ctx.config.seed)
    shapes = [(n, horizon) for n in (2, 3) for horizon in (1, 2, 3)]
    texts = ["total", "crash(1)", "loss(1)", "crash1@1"]
    params = {"samples": ctx.config.samples, "seed": ctx.config.seed}
    for _ in range(ctx.config.samples):
        n, horizon = rng.choice(shapes)
        p = ctx.build(rng.choice(texts), n, horizon)
        c = p.member(rng.randrange(len(p)))
        f = _random_strategy(rng, p)
        t = standard_execution(f, c, ctx.config.ordering)
        broken = first_violation(t) or collection_violation(t, c) or strategy_violation(t, f)
        if broken is not None:
            return [_fails("standard-execution-correctness", params, {
                "collection": c.to_json(),
                "strategy": f.to_json(),
                "violation": broken.to_json(),
            })]
    return [_holds("standard-execution-correctness", params, tier="sampled")]


def check_canonical_execution(ctx: SuiteContext) -> List[TheoremReport]:
    faults = ctx.config.faults
    target = ho_product(masks_with_min_size(ctx.n, ctx.n - faults), ctx.n, ctx.horizon, ctx.config.set_cap)
    total = ctx.build("total")
    c_total = total.member(0)
    params = {"n": ctx.n, "horizon": ctx.horizon, "faults": faults, "size": len(target)}
    for ho in target:
        t = canonical_execution(ho, ctx.config.ordering)
        broken = collection_violation(t, c_total)
        if broken is not None:
            return [_fails("canonical-execution", params, {"ho": ho.to_json(), "violation": broken.to_json()})]
        if extract_heardof(t) != ho:
            return [_fails("canonical-execution", params, {"ho": ho.to_json(), "extracted": extract_heardof(t).to_json()})]
    return [_holds("canonical-execution", params)]


def _applications(ctx: SuiteContext):
    """(label, operation, operand predicates, result predicate) for the pool"""
    built = [ctx.build(text) for text in ctx.pool()]
    cap = ctx.config.cap
    for p1, p2 in combinations_with_replacement(built, 2):
        yield "union", (p1, p2), union_pred(p1, p2)
        yield "succeed", (p1, p2), succeed_pred(p1, p2, cap)
        yield "succeed", (p2, p1), succeed_pred(p2, p1, cap)
        yield "combine", (p1, p2), combine_pred(p1, p2, cap)
    for p in built:
        yield "repeat", (p,), repeat_pred(p, cap)


def _expected_strategy(op: str, operands, minimal: Callable):
    strategies = [minimal(p) for p in operands]
    if op == "union":
        return strat_union(*strategies)
    if op == "succeed":
        return strat_succeed(*strategies)
    if op == "combine":
        return strat_combine(*strategies)
    return strat_repeat(*strategies)


def _describe(op: str, result: DeliveredPredicate) -> Dict[str, Any]:
    return {"operation": op, "expr": to_text(result.expr)}


def check_oblivious_composition(ctx: SuiteContext) -> List[TheoremReport]:
    params = {"n": ctx.n, "horizon": ctx.horizon, "pool": ctx.pool()}
    checked = 0
    for op, operands, result in _applications(ctx):
        if op == "combine" and not all(is_round_symmetric(p) for p in operands):
            continue
        expected = _expected_strategy(op, operands, minimal_oblivious)
        actual = minimal_oblivious(result)
        checked += 1
        if actual.nexts != expected.nexts:
            witness = _describe(op, result)
            witness["expected"] = [format_mask(m) for m in sorted(expected.nexts)]
            witness["actual"] = [format_mask(m) for m in sorted(actual.nexts)]
            return [_fails("oblivious-composition", params, witness)]
    params["applications"] = checked
    return [_holds("oblivious-composition", params)]


def check_conservative_composition(ctx: SuiteContext) -> List[TheoremReport]:
    params = {"n": ctx.n, "horizon": ctx.horizon, "pool": ctx.pool()}
    checked = 0
    for op, operands, result in _applications(ctx):
        if not all(is_prefix_symmetric(p) for p in operands):
            continue
        expected = _expected_strategy(op, operands, minimal_conservative)
        actual = minimal_conservative(result)
        checked += 1
        if actual.nexts_c != expected.nexts_c:
            witness = _describe(op, result)
            difference = sorted(actual.nexts_c ^ expected.nexts_c)[0]
            witness["prefix"] = [format_mask(m) for m in difference]
            witness["in_minimal"] = difference in actual.nexts_c
            return [_fails("conservative-composition", params, witness)]
    params["applications"] = checked
    return [_holds("conservative-composition", params)]


def check_conservative_upper_bounds(ctx: SuiteContext) -> List[TheoremReport]:
    texts = [ctx.config.expression("crash"), f"crash1@{ctx.horizon}", "total"]
    built = [ctx.build(text) for text in dict.fromkeys(texts)]
    cap = ctx.config.cap
    params = {"n": ctx.n, "horizon": ctx.horizon}
    cases = []
    for p1, p2 in combinations_with_replacement(built, 2):
        cases.append(("union", p1, p2, union_pred(p1, p2)))
        cases.append(("succeed", p1, p2, succeed_pred(p1, p2, cap)))
        cases.append(("combine", p1, p2, combine_pred(p1, p2, cap)))
    cases.extend(("repeat", p, None, repeat_pred(p, cap)) for p in built)
    partial = False
    checked = 0
    for op, p1, p2, result in cases:
        if not all(is_prefix_symmetric(p) for p in (p1, p2) if p is not None):
            continue
        f1 = minimal_conservative(p1)
        f2 = None if p2 is None else minimal_conservative(p2)
        f = strat_repeat(f1) if op == "repeat" else _expected_strategy(op, (p1, p2), minimal_conservative)
        bound = conservative_ho_upper_bound(f1, f2, op, p1, p2, ctx.config.set_cap)
        ho, outcome = ctx.enumerate(f, result)
        partial = partial or outcome.partial
        checked += 1
        outside = ho.missing_from(bound)
        if outside is not None:
            witness = _describe(op, result)
            witness["collection"] = outside.to_json()
            return [_fails("conservative-upper-bounds", params, witness)]
    params["applications"] = checked
    if partial:
        return [_partial("conservative-upper-bounds", params, "scheduler budget exhausted")]
    return [_holds("conservative-upper-bounds", params)]


def check_crash_combination(ctx: SuiteContext) -> List[TheoremReport]:
    single = ctx.build("crash(1)")
    combined = combine_pred(single, single, ctx.config.cap)
    direct = build_crashF(ctx.n, ctx.horizon, min(2, ctx.n), ctx.config.cap)
    params = {"n": ctx.n, "horizon": ctx.horizon, "size": len(direct)}
    extra = sorted(combined.tables - direct.tables)
    missing = sorted(direct.tables - combined.tables)
    if extra or missing:
        rows = extra[0] if extra else missing[0]
        side = "combination_only" if extra else "crash2_only"
        return [_fails("crash-combination-identity", params, {
            side: DeliveredCollection(ctx.n, ctx.horizon, rows).to_json(),
        })]
    return [_holds("crash-combination-identity", params)]


def check_hoprod_equality(ctx: SuiteContext) -> List[TheoremReport]:
    reports = []
    for role in ("crash", "loss"):
        p = ctx.role(role)
        if not p.has_total():
            continue
        base = minimal_oblivious(p).nexts
        variants = {"minimal": base, "minimal+empty": base | {0}, "minimal+p1": base | {1}}
        for label, nexts in variants.items():
            f = ObliviousStrategy(ctx.n, nexts)
            params = predicate_params(p, strategy=label)
            ho, result = ctx.enumerate(f, p)
            if result.partial:
                reports.append(_partial("hoprod-equality", params, "scheduler budget exhausted"))
                continue
            expected = ho_product(nexts, ctx.n, ctx.horizon, ctx.config.set_cap)
            params["size"] = len(expected)
            reports.append(_set_equality("hoprod-equality", params, ho, expected))
    return reports


def check_property_preservation(ctx: SuiteContext) -> List[TheoremReport]:
    params = {"n": ctx.n, "horizon": ctx.horizon, "pool": ctx.pool()}
    checked = 0
    for op, operands, result in _applications(ctx):
        for name, holds in (("common-round", has_common_round), ("common-prefix", has_common_prefix)):
            if all(holds(p) for p in operands):
                checked += 1
                if not holds(result):
                    witness = _describe(op, result)
                    witness["property"] = name
                    return [_fails("property-preservation", params, witness)]
    params["applications"] = checked
    return [_holds("property-preservation", params)]


def check_floss_validity(ctx: SuiteContext) -> List[TheoremReport]:
    p = ctx.role("loss")
    params = predicate_params(p)
    _, result = ctx.enumerate(f_loss(ctx.n), p)
    if result.deadlocks:
        return [_fails("floss-validity", params, {"deadlock": result.deadlocks[0].to_json()})]
    if result.partial:
        return [_partial("floss-validity", params, "scheduler budget exhausted")]
    return [_holds("floss-validity", params, notes=["no blocked fair execution up to the horizon"])]


def check_floss_characterization(ctx: SuiteContext) -> List[TheoremReport]:
    p = ctx.role("loss")
    ho, result = ctx.enumerate(f_loss(ctx.n), p)
    if result.partial:
        return [_partial("floss-characterization", predicate_params(p), "scheduler budget exhausted")]
    exact = floss_characterization(ctx.n, ctx.horizon, ctx.config.set_cap)
    loose = deficiency_set(ctx.n, ctx.horizon, ctx.config.set_cap)
    params = predicate_params(p, size=len(exact), deficiency_size=len(loose))
    report = _set_equality("floss-characterization", params, ho, exact)
    if report.verdict is Verdict.HOLDS:
        outside = ho.missing_from(loose)
        if outside is not None:
            return [_fails("floss-characterization", params, {"over_deficiency": outside.to_json()})]
        gap = loose.missing_from(ho)
        if gap is not None:
            report.witness = {"deficiency_only": gap.to_json()}
            report.notes.append(
                "a process short at round r moves on only after hearing every other "
                "process at round r+1, at any horizon"
            )
    return [report]


def check_floss_shifted_canonical(ctx: SuiteContext) -> List[TheoremReport]:
    n, horizon = ctx.n, ctx.horizon
    f = f_loss(n)
    targets = deficiency_set(n, horizon, ctx.config.set_cap)
    exact = floss_characterization(n, horizon, ctx.config.set_cap)
    c_total = ctx.build("total").member(0)
    params = {"n": n, "horizon": horizon, "size": len(targets)}
    realized = 0
    for ho in targets:
        if ho not in exact:
            try:
                shifted_canonical_execution(ho, ctx.config.ordering)
            except DomainError:
                continue
            return [_fails("floss-shifted-canonical", params, {"ho": ho.to_json(), "accepted": "unreachable collection"})]
        t = shifted_canonical_execution(ho, ctx.config.ordering)
        broken = collection_violation(t, c_total) or strategy_violation(t, f)
        if broken is not None:
            return [_fails("floss-shifted-canonical", params, {"ho": ho.to_json(), "violation": broken.to_json()})]
        if extract_heardof(t) != ho:
            return [_fails("floss-shifted-canonical", params, {"ho": ho.to_json(), "extracted": extract_heardof(t).to_json()})]
        realized += 1
    params["realized"] = realized
    return [_holds("floss-shifted-canonical", params)]


def check_family_reports(ctx: SuiteContext) -> List[TheoremReport]:
    return [
        check_family_domination(ctx.role("crash"), "oblivious", ctx.config.samples, ctx.config.seed, ctx.config.budget),
        check_family_domination(ctx.role("late_crash"), "conservative", min(ctx.config.samples, 16), ctx.config.seed, ctx.config.budget),
    ]


def check_domination_certificates(ctx: SuiteContext) -> List[TheoremReport]:
    reports = []
    for role, expected in (("crash", "common-round"), ("loss", "none")):
        evidence = check_global_domination_evidence(ctx.role(role), ctx.config.budget)
        certificate = evidence.witness["certificate"]
        params = dict(evidence.params, expected=expected)
        # a missing certificate must never read as a refutation
        settled = Verdict.NO_CONDITION if expected == "none" else Verdict.HOLDS
        if certificate != expected or evidence.verdict is not settled:
            reports.append(_fails("domination-certificates", params, evidence.witness))
        else:
            reports.append(_holds("domination-certificates", params, witness=evidence.witness, tier="certificate", notes=evidence.notes))
    return reports


def check_domination_separation(ctx: SuiteContext) -> List[TheoremReport]:
    reports = []
    late = ctx.role("late_crash")
    comparison = compare_families(late, ctx.config.budget)
    params = dict(comparison.params, compared="conservative vs oblivious")
    if comparison.verdict is Verdict.HOLDS and comparison.params.get("strict"):
        reports.append(_holds("domination-separation", params, witness=comparison.witness))
    elif comparison.verdict is Verdict.PARTIAL:
        reports.append(_partial("domination-separation", params, "scheduler budget exhausted"))
    else:
        reports.append(_fails("domination-separation", params, comparison.witness or {"strict": False}))

    loss = ctx.role("loss")
    params = predicate_params(loss, compared="f_loss vs oblivious")
    outcome = floss_comparison(loss, ctx.config.budget)
    if outcome is None:
        reports.append(_fails("domination-separation", params, {"reason": "f_loss blocks or was cut short"}))
    elif outcome["contained"] and outcome["strict"]:
        reports.append(_holds("domination-separation", params, witness=outcome))
    else:
        reports.append(_fails("domination-separation", params, outcome))
    return reports


def check_order_independence(ctx: SuiteContext) -> List[TheoremReport]:
    p = ctx.role("crash")
    f = f_n_minus_F(ctx.n, ctx.config.faults)
    params = predicate_params(p)
    for c in p:
        runs = [standard_execution(f, c, ordering) for ordering in Ordering]
        heard = [extract_heardof(run) for run in runs]
        if heard[0] != heard[1]:
            return [_fails("order-independence", params, {"collection": c.to_json()})]
    target = ho_product(minimal_oblivious(p).nexts, ctx.n, ctx.horizon, ctx.config.set_cap)
    for ho in target:
        heard = [extract_heardof(canonical_execution(ho, ordering)) for ordering in Ordering]
        if heard[0] != heard[1]:
            return [_fails("order-independence", params, {"ho": ho.to_json()})]
    return [_holds("order-independence", params)]


CHECKS: Dict[str, Callable[[SuiteContext], List[TheoremReport]]] = {
    "canonical-execution": check_canonical_execution,
    "conservative-composition": check_conservative_composition,
    "conservative-upper-bounds": check_conservative_upper_bounds,
    "conservative-validity-criterion": check_conservative_validity,
    "crash-combination-identity": check_crash_combination,
    "domination-certificates": check_domination_certificates,
    "domination-separation": check_domination_separation,
    "family-domination": check_family_reports,
    "floss-characterization": check_floss_characterization,
    "floss-shifted-canonical": check_floss_shifted_canonical,
    "floss-validity": check_floss_validity,
    "fnf-characterization": check_fnf_characterization,
    "hoprod-equality": check_hoprod_equality,
    "oblivious-composition": check_oblivious_composition,
    "oblivious-validity-criterion": check_oblivious_validity,
    "order-independence": check_order_independence,
    "property-preservation": check_property_preservation,
    "standard-execution-correctness": check_standard_execution,
}


def _report_key(report: TheoremReport) -> Tuple[str, str]:
    return report.theorem, json.dumps(report.params, sort_keys=True)


def run_theorem_suite(config: SuiteConfig) -> SuiteReport:
    """Run the selected checks; a failing or erroring check becomes a report"""
    ctx = SuiteContext(config)
    names = sorted(config.checks) if config.checks is not None else sorted(CHECKS)
    reports: List[TheoremReport] = []
    for name in names:
        start = time.perf_counter()
        params = {"n": config.n, "horizon": config.horizon}
        try:
            produced = CHECKS[name](ctx)
        except EnumerationCapError as e:
            produced = [_partial(name, params, str(e))]
        except HeardOfError as e:
            produced = [_fails(name, params, {"error": str(e)})]
        elapsed = int((time.perf_counter() - start) * 1000)
        for report in produced:
            if config.timings:
                report.elapsed_ms = elapsed
            logger.info("%s: %s", report.theorem, report.verdict.value)
        reports.extend(produced)
    reports.sort(key=_report_key)
    return SuiteReport(config=config.params(), reports=reports)


def _overall(reports: List[TheoremReport]) -> str:
    verdicts = {r.verdict for r in reports}
    for verdict in (Verdict.FAILS, Verdict.PARTIAL, Verdict.NO_CONDITION, Verdict.HOLDS):
        if verdict in verdicts:
            return verdict.value
    return Verdict.HOLDS.value


def run_horizon_sweep(config: SuiteConfig, horizons: List[int]) -> SweepReport:
    """Rerun the suite at several horizons and list the checks whose verdict moves"""
    runs = [
        run_theorem_suite(config.model_copy(update={"horizon": horizon}))
        for horizon in horizons
    ]
    by_check: Dict[str, Dict[str, str]] = {}
    for horizon, run in zip(horizons, runs):
        grouped: Dict[str, List[TheoremReport]] = {}
        for report in run.reports:
            grouped.setdefault(report.theorem, []).append(report)
        for theorem, reports in grouped.items():
            by_check.setdefault(theorem, {})[str(horizon)] = _overall(reports)
    differences = [
        {"theorem": theorem, "verdicts": verdicts}
        for theorem, verdicts in sorted(by_check.items())
        if len(set(verdicts.values())) > 1
    ]
    return SweepReport(runs=runs, differences=differences)
