"""
Command-line entry point: build predicates, derive strategies, generate
heard-of predicates, export traces and run the theorem suite
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from heardof import __version__
from heardof.analysis import (
    TheoremReport,
    Verdict,
    check_family_domination,
    check_global_domination_evidence,
    compare_families,
    enumerate_ho,
    generate_ho_oblivious,
    predicate_params,
)
from heardof.config import (
    DEFAULT_BUDGET,
    DEFAULT_HORIZON,
    DEFAULT_N,
    DEFAULT_PRESET,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    PRESET_NAMES,
    PRESETS,
    enumeration_cap,
)
from heardof.errors import HeardOfError, ParameterError
from heardof.executions import (
    canonical_execution,
    shifted_canonical_execution,
    standard_execution,
)
from heardof.expr import to_text
from heardof.image_renderer import render_trace_to_image
from heardof.model import Collection, HeardOfCollection, Ordering, format_mask
from heardof.parser import parse_expr
from heardof.predicates import (
    DeliveredPredicate,
    build_expr,
    common_prefix_gap,
    common_round_gap,
    describe_gap,
    prefix_symmetry_gap,
    round_symmetry_gap,
)
from heardof.report_renderer import (
    dumps,
    render_ho,
    render_predicate,
    render_report,
    render_strategy,
    render_suite,
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
    strategy_from_json,
)
from heardof.suite import SuiteConfig, run_horizon_sweep, run_theorem_suite

logger = logging.getLogger("heardof")

STRATEGY_CHOICES = ("minimal-obliv", "minimal-cons", "fnf", "floss")
PROPERTIES = (
    "round-sym",
    "prefix-sym",
    "common-round",
    "common-prefix",
    "validity",
    "domination",
    "family-domination",
    "families",
)


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def horizon_list(text: str) -> List[int]:
    try:
        return [positive_int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated horizons, got {text}")


def common_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--n", type=positive_int, default=DEFAULT_N, help="number of processes")
    parent.add_argument("--horizon", type=positive_int, default=DEFAULT_HORIZON, help="rounds R")
    parent.add_argument("--expr", help='predicate expression, e.g. "crash(1) ~> total"')
    parent.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="named predicate: " + "; ".join(f"{k} = {v}" for k, v in PRESET_NAMES.items()),
    )
    parent.add_argument("--faults", type=nonnegative_int, default=1, help="F for presets and f_n_minus_F")
    parent.add_argument("--from-round", type=positive_int, default=1, help="first round for crash1_from")
    parent.add_argument("--format", choices=("json", "text", "png"), default="json", help="png: trace only")
    parent.add_argument("--cap", type=positive_int, help="enumeration cap (default: HEARDOF_CAP or 10^7)")
    parent.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for sampled checks")
    parent.add_argument("--out", help="write output to this file instead of stdout")
    parent.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = common_parser()
    parser = argparse.ArgumentParser(
        prog="heardof",
        description="Delivered predicates, strategies and heard-of predicates at a finite horizon",
    )
    parser.add_argument("--version", action="version", version=f"heardof {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", parents=[parent], help="enumerate a delivered predicate")
    build.add_argument("--limit", type=nonnegative_int, help="text output: first members only")

    minimal = sub.add_parser("minimal", parents=[parent], help="minimal strategy of a predicate")
    minimal.add_argument(
        "--family",
        choices=("obliv", "cons", "oblivious", "conservative"),
        required=True,
    )

    ho = sub.add_parser("ho", parents=[parent], help="heard-of predicate of a strategy")
    ho.add_argument(
        "--strategy",
        default="minimal-obliv",
        help=f"one of {', '.join(STRATEGY_CHOICES)} or a strategy JSON file",
    )
    ho.add_argument("--enumerate", action="store_true", help="allow scheduler enumeration")
    ho.add_argument(
        "--budget",
        type=positive_int,
        default=DEFAULT_BUDGET,
        help="scheduler transitions per member, used with --enumerate (default: %(default)s)",
    )
    ho.add_argument("--workers", type=positive_int, default=1)
    ho.add_argument("--members", action="store_true", help="list every collection")

    trace = sub.add_parser("trace", parents=[parent], help="standard or canonical execution")
    trace.add_argument("--kind", choices=("standard", "canonical", "shifted"), default="standard")
    trace.add_argument("--strategy", default="minimal-obliv")
    trace.add_argument("--collection", help="JSON collection file")
    trace.add_argument("--member", type=nonnegative_int, default=0, help="index of a member of --expr")
    trace.add_argument("--reverse-order", action="store_true")

    check = sub.add_parser("check", parents=[parent], help="check one property")
    check.add_argument("--property", choices=PROPERTIES, required=True)
    check.add_argument("--strategy", default="minimal-obliv")
    check.add_argument("--family", choices=("obliv", "cons"), default="obliv")
    check.add_argument("--samples", type=positive_int, default=DEFAULT_SAMPLES)
    check.add_argument("--budget", type=positive_int)

    suite = sub.add_parser("suite", parents=[parent], help="run the theorem suite")
    suite.add_argument("--checks", help="comma-separated check ids")
    suite.add_argument("--samples", type=positive_int, default=DEFAULT_SAMPLES)
    suite.add_argument("--budget", type=positive_int)
    suite.add_argument("--workers", type=positive_int, default=1)
    suite.add_argument("--timings", action="store_true", help="add elapsed_ms to reports")
    suite.add_argument("--reverse-order", action="store_true")
    suite.add_argument("--sweep", type=horizon_list, help="horizons to compare, e.g. 1,2,3")
    suite.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="ROLE=EXPR",
        help="replace the crash, loss or late_crash predicate",
    )
    return parser


def configure_logging(verbose: int) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def expression_text(args: argparse.Namespace, required: bool = True) -> Optional[str]:
    if args.expr is not None:
        return args.expr
    if args.preset is not None:
        return PRESETS[args.preset].expression(args.horizon, args.faults, args.from_round)
    if required:
        raise ParameterError(
            f"--expr or --preset is required (e.g. --preset {DEFAULT_PRESET})"
        )
    return None


def load_predicate(args: argparse.Namespace) -> DeliveredPredicate:
    text = expression_text(args)
    cap = args.cap if args.cap is not None else enumeration_cap()
    p = build_expr(parse_expr(text), args.n, args.horizon, cap)
    logger.info("built %s: %d members", to_text(p.expr), len(p))
    return p


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ParameterError(f"cannot read {path}: {e}")


def resolve_strategy(name: str, args: argparse.Namespace, p: Optional[DeliveredPredicate]) -> Strategy:
    if name == "fnf":
        return f_n_minus_F(args.n, args.faults)
    if name == "floss":
        return f_loss(args.n)
    if name in ("minimal-obliv", "minimal-cons"):
        if p is None:
            raise ParameterError(f"strategy {name} needs --expr or --preset")
        return minimal_oblivious(p) if name == "minimal-obliv" else minimal_conservative(p)
    if os.path.exists(name):
        return strategy_from_json(read_json(name))
    raise ParameterError(
        f"unknown strategy {name!r}; use {', '.join(STRATEGY_CHOICES)} or a JSON file"
    )


def emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def cmd_build(args: argparse.Namespace) -> int:
    p = load_predicate(args)
    if args.format == "json":
        emit(args, dumps(p.to_json()))
    else:
        emit(args, render_predicate(p, args.limit))
    return 0


def cmd_minimal(args: argparse.Namespace) -> int:
    p = load_predicate(args)
    oblivious = args.family in ("obliv", "oblivious")
    f = minimal_oblivious(p) if oblivious else minimal_conservative(p)
    emit(args, dumps(f.to_json()) if args.format == "json" else render_strategy(f))
    return 0


def cmd_ho(args: argparse.Namespace) -> int:
    p = load_predicate(args)
    f = resolve_strategy(args.strategy, args, p)
    result = None
    if isinstance(f, ObliviousStrategy) and p.has_total() and oblivious_valid_for(f, p):
        ho = generate_ho_oblivious(f, p)
    elif not args.enumerate:
        raise ParameterError(
            "this strategy needs the scheduler search; pass --enumerate (and --budget N)"
        )
    else:
        ho, result = enumerate_ho(f, p, budget=args.budget, workers=args.workers)
    if args.format == "json":
        data = ho.to_json(members=args.members)
        if result is not None:
            data["deadlocks"] = [d.to_json() for d in result.deadlocks]
            data["partial"] = result.partial
            data["budget"] = args.budget
        emit(args, dumps(data))
    else:
        emit(args, render_ho(ho, args.strategy, to_text(p.expr), result, args.members))
    return 0


def trace_target(args: argparse.Namespace) -> Tuple[Collection, Optional[DeliveredPredicate]]:
    if args.collection:
        c = Collection.from_json(read_json(args.collection))
        p = None
        if expression_text(args, required=False) is not None:
            p = load_predicate(args)
        return c, p
    p = load_predicate(args)
    return p.member(args.member), p


def cmd_trace(args: argparse.Namespace) -> int:
    c, p = trace_target(args)
    ordering = Ordering.REVERSED if args.reverse_order else Ordering.FORWARD
    if args.kind == "standard":
        f = resolve_strategy(args.strategy, args, p)
        t = standard_execution(f, c, ordering)
    else:
        ho = HeardOfCollection(c.n, c.horizon, c.rows)
        build = canonical_execution if args.kind == "canonical" else shifted_canonical_execution
        t = build(ho, ordering)
    if args.format == "png":
        if not args.out:
            raise ParameterError("--format png needs --out FILE")
        with open(args.out, "wb") as handle:
            handle.write(render_trace_to_image(t.to_text()))
        return 0
    if args.format == "json":
        emit(args, dumps(t.to_json()))
    else:
        emit(args, t.to_text() + "\n")
    return 0


def structural_report(name: str, p: DeliveredPredicate) -> TheoremReport:
    gaps = {
        "round-sym": round_symmetry_gap,
        "prefix-sym": prefix_symmetry_gap,
        "common-round": common_round_gap,
        "common-prefix": common_prefix_gap,
    }
    gap = gaps[name](p)
    if gap is None:
        return TheoremReport(theorem=name, params=predicate_params(p), verdict=Verdict.HOLDS)
    return TheoremReport(
        theorem=name,
        params=predicate_params(p),
        verdict=Verdict.FAILS,
        witness=describe_gap(gap),
    )


def validity_report(f: Strategy, args: argparse.Namespace, p: DeliveredPredicate) -> TheoremReport:
    params = predicate_params(p, strategy=args.strategy)
    if isinstance(f, ObliviousStrategy):
        valid = oblivious_valid_for(f, p)
        tier = "criterion"
    elif isinstance(f, ConservativeStrategy):
        valid = conservative_valid_for(f, p)
        tier = "criterion"
    else:
        _, result = enumerate_ho(f, p, budget=args.budget)
        if result.deadlocks:
            return TheoremReport(
                theorem="validity",
                params=params,
                verdict=Verdict.FAILS,
                tier="scheduler",
                witness={"deadlock": result.deadlocks[0].to_json()},
            )
        verdict = Verdict.PARTIAL if result.partial else Verdict.HOLDS
        return TheoremReport(theorem="validity", params=params, verdict=verdict, tier="scheduler")
    if valid:
        return TheoremReport(theorem="validity", params=params, verdict=Verdict.HOLDS, tier=tier)
    minimal = minimal_oblivious(p) if isinstance(f, ObliviousStrategy) else minimal_conservative(p)
    if isinstance(f, ObliviousStrategy):
        missing = sorted(minimal.nexts - f.nexts)
        witness = {"missing": [format_mask(m) for m in missing]}
    else:
        missing = sorted(minimal.nexts_c - f.nexts_c)
        witness = {"missing": [[format_mask(m) for m in q] for q in missing]}
    return TheoremReport(
        theorem="validity", params=params, verdict=Verdict.FAILS, tier=tier, witness=witness
    )


def cmd_check(args: argparse.Namespace) -> int:
    p = load_predicate(args)
    prop = args.property
    if prop in ("round-sym", "prefix-sym", "common-round", "common-prefix"):
        report = structural_report(prop, p)
    elif prop == "validity":
        report = validity_report(resolve_strategy(args.strategy, args, p), args, p)
    elif prop == "domination":
        report = check_global_domination_evidence(p, args.budget)
    elif prop == "family-domination":
        report = check_family_domination(p, args.family, args.samples, args.seed, args.budget)
    else:
        report = compare_families(p, args.budget)
    if args.format == "json":
        emit(args, dumps(report.to_json_dict()))
    else:
        emit(args, render_report(report))
    return 0


def parse_overrides(items: List[str]) -> Dict[str, str]:
    overrides = {}
    for item in items:
        role, sep, text = item.partition("=")
        if not sep or not text.strip():
            raise ParameterError(f"override {item!r} is not ROLE=EXPR")
        parse_expr(text)
        overrides[role.strip()] = text.strip()
    return overrides


def cmd_suite(args: argparse.Namespace) -> int:
    checks = None
    if args.checks:
        checks = [name.strip() for name in args.checks.split(",") if name.strip()]
    config = SuiteConfig(
        n=args.n,
        horizon=args.horizon,
        faults=args.faults,
        seed=args.seed,
        samples=args.samples,
        budget=args.budget,
        cap=args.cap if args.cap is not None else enumeration_cap(),
        workers=args.workers,
        ordering=Ordering.REVERSED if args.reverse_order else Ordering.FORWARD,
        timings=args.timings,
        checks=checks,
        overrides=parse_overrides(args.override),
    )
    if args.sweep:
        sweep = run_horizon_sweep(config, args.sweep)
        if args.format == "json":
            emit(args, dumps(sweep.to_json_dict()))
        else:
            text = "".join(render_suite(run) for run in sweep.runs)
            for diff in sweep.differences:
                text += f"differs: {diff['theorem']} {json.dumps(diff['verdicts'], sort_keys=True)}\n"
            emit(args, text)
        return sweep.exit_code
    report = run_theorem_suite(config)
    if args.format == "json":
        emit(args, dumps(report.to_json_dict()))
    else:
        emit(args, render_suite(report))
    return report.exit_code


COMMANDS = {
    "build": cmd_build,
    "minimal": cmd_minimal,
    "ho": cmd_ho,
    "trace": cmd_trace,
    "check": cmd_check,
    "suite": cmd_suite,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        if args.format == "png" and args.command != "trace":
            raise ParameterError("png output is only available for trace")
        return COMMANDS[args.command](args)
    except HeardOfError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValidationError as e:
        print(f"error: invalid suite configuration: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
