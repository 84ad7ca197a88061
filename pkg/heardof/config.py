"""
Configuration and constants for heard-of analysis
"""

import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, Tuple

from heardof.errors import ParameterError


# Refuse constructions whose candidate space exceeds this many tables
DEFAULT_CAP = 10**7
# Materialized heard-of / delivered sets compared by the suite
DEFAULT_SET_CAP = 10**6
# Scheduler transitions explored before a search is reported partial
DEFAULT_BUDGET = 5 * 10**6

DEFAULT_N = 3
DEFAULT_HORIZON = 2
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 200

CAP_ENV_VAR = "HEARDOF_CAP"


def enumeration_cap() -> int:
    """Enumeration cap, overridable through the HEARDOF_CAP environment variable"""
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None or not raw.strip():
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ParameterError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}")
    if cap < 1:
        raise ParameterError(f"{CAP_ENV_VAR} must be positive, got {cap}")
    return cap


@dataclass
class PresetConfig:
    """Configuration for a named delivered-predicate construction"""

    name: str  # Display name
    description: str
    # Builds the expression text from (horizon, F, first round)
    build: Callable[[int, int, int], str]
    # Parameters the builder reads, for --help and the README table
    params: List[str] = field(default_factory=list)

    def expression(self, horizon: int, faults: int = 1, from_round: int = 1) -> str:
        if faults < 0:
            raise ParameterError(f"F must be nonnegative, got {faults}")
        if not 1 <= from_round <= horizon:
            raise ParameterError(
                f"first round {from_round} outside [1, {horizon}]"
            )
        return self.build(horizon, faults, from_round)


def _fold(term: str, times: int) -> str:
    """Combine `term` with itself `times` times"""
    if times == 0:
        return "total"
    return " (*) ".join([term] * times)


def _crash_distinct(horizon: int, faults: int) -> str:
    if faults == 0:
        return "total"
    if faults > horizon:
        raise ParameterError(
            f"{faults} crashes in distinct rounds need a horizon of at least {faults}"
        )
    terms = [
        "(" + " (*) ".join(f"crash1@{r}" for r in rounds) + ")"
        for rounds in combinations(range(1, horizon + 1), faults)
    ]
    return " | ".join(terms)


# Delivered predicates built with the four operators
PRESETS: Dict[str, PresetConfig] = {
    "crash1": PresetConfig(
        name="At most 1 crash",
        description="union of one crash at round r, for every round of the horizon",
        build=lambda R, F, r: " | ".join(f"crash1@{i}" for i in range(1, R + 1)),
    ),
    "crashF": PresetConfig(
        name="At most F crashes",
        description="F-fold combination of at most 1 crash",
        build=lambda R, F, r: _fold("crash(1)", F),
        params=["F"],
    ),
    "recover1": PresetConfig(
        name="At most 1 crash, which will restart",
        description="at most 1 crash followed by the total predicate",
        build=lambda R, F, r: "crash(1) ~> total",
    ),
    "recoverF": PresetConfig(
        name="At most F crashes, which will restart",
        description="F-fold combination of recover1",
        build=lambda R, F, r: _fold("(crash(1) ~> total)", F),
        params=["F"],
    ),
    "canrecover1": PresetConfig(
        name="At most 1 crash, which can restart",
        description="recover1 or a permanent crash",
        build=lambda R, F, r: "(crash(1) ~> total) | crash(1)",
    ),
    "canrecoverF": PresetConfig(
        name="At most F crashes, which can restart",
        description="F-fold combination of canrecover1",
        build=lambda R, F, r: _fold("((crash(1) ~> total) | crash(1))", F),
        params=["F"],
    ),
    "recovery1": PresetConfig(
        name="No bound on crashes and restart, 1 crash at a time",
        description="repetition of at most 1 crash",
        build=lambda R, F, r: "crash(1)^w",
    ),
    "recoveryF": PresetConfig(
        name="No bound on crashes and restart, F crashes at a time",
        description="F-fold combination of recovery1",
        build=lambda R, F, r: _fold("crash(1)^w", F),
        params=["F"],
    ),
    "crash1_from": PresetConfig(
        name="At most 1 crash, after round r",
        description="union of one crash at round i, for i from r to the horizon",
        build=lambda R, F, r: " | ".join(f"crash1@{i}" for i in range(r, R + 1)),
        params=["r"],
    ),
    "crash_distinct": PresetConfig(
        name="At most F crashes, no more than one per round",
        description="union over distinct rounds of the combination of single crashes",
        build=lambda R, F, r: _crash_distinct(R, F),
        params=["F"],
    ),
}

# Default preset
DEFAULT_PRESET = "crash1"

# Get list of preset names for --help
PRESET_NAMES = {key: config.name for key, config in PRESETS.items()}

# Trace line patterns for colouring exported traces: (pattern, color_key)
TRACE_TOKEN_PATTERNS: List[Tuple[str, str]] = [
    (r"^D \d+ p\d+ p\d+$", "deliver"),
    (r"^N p\d+$", "next"),
    (r"^S$", "stop"),
]
