"""
Jinja2 text rendering for predicates, strategies, heard-of sets and reports
"""

import json
import os
from typing import Any, Dict, Optional

from jinja2 import Environment, FileSystemLoader, select_autoescape

from heardof.analysis import HeardOfPredicate, TheoremReport
from heardof.expr import to_text
from heardof.model import format_mask
from heardof.predicates import DeliveredPredicate
from heardof.scheduler import EnumerationResult
from heardof.strategies import ConservativeStrategy, ObliviousStrategy, Strategy

# Template directory
TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), "templates")


def custom_tojson(value, ensure_ascii=True, indent=None, sort_keys=False):
    """tojson filter with ensure_ascii and sort_keys"""
    return json.dumps(value, ensure_ascii=ensure_ascii, indent=indent, sort_keys=sort_keys)


def dumps(data: Any) -> str:
    """Canonical JSON text for command output"""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def get_jinja_env() -> Environment:
    env = Environment(
        loader=FileSystemLoader(TEMPLATE_DIR),
        autoescape=select_autoescape(enabled_extensions=()),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters["tojson"] = custom_tojson
    env.filters["pset"] = format_mask
    return env


def render(template_name: str, **context: Any) -> str:
    return get_jinja_env().get_template(template_name).render(**context)


def render_predicate(p: DeliveredPredicate, limit: Optional[int] = None) -> str:
    """
    Render a delivered predicate as text.

    Args:
        p: The predicate
        limit: Render only the first `limit` members in canonical order

    Returns:
        Rendered text
    """
    collections = list(p)
    if limit is not None:
        collections = collections[:limit]
    return render(
        "predicate.jinja",
        expr=to_text(p.expr),
        n=p.n,
        horizon=p.horizon,
        collections=collections,
    )


def render_strategy(f: Strategy) -> str:
    context: Dict[str, Any] = {
        "family": f.kind.value,
        "n": f.n,
        "horizon": getattr(f, "horizon", None),
        "nexts": None,
        "prefixes": None,
    }
    if isinstance(f, ObliviousStrategy):
        context["nexts"] = sorted(f.nexts)
    elif isinstance(f, ConservativeStrategy):
        context["prefixes"] = sorted(f.nexts_c, key=lambda q: (len(q), q))
    return render("strategy.jinja", **context)


def render_ho(
    ho: HeardOfPredicate,
    strategy: str,
    expr: str,
    result: Optional[EnumerationResult] = None,
    members: bool = True,
) -> str:
    return render(
        "ho.jinja",
        strategy=strategy,
        expr=expr,
        n=ho.n,
        horizon=ho.horizon,
        size=len(ho),
        generator=ho.generator,
        basis=sorted(ho.basis) if ho.basis is not None else None,
        deadlocks=list(result.deadlocks) if result is not None else [],
        partial=result.partial if result is not None else False,
        collections=list(ho) if members else [],
    )


def render_report(report: TheoremReport) -> str:
    return render("report.jinja", report=report)


def render_suite(report) -> str:
    """Render a SuiteReport as text"""
    return render(
        "suite.jinja",
        config=report.config,
        reports=report.reports,
        summary=report.summary(),
    )
