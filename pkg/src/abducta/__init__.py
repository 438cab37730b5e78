"""Abductive conformance checking of incomplete event logs.

Traces whose events may lack an activity name, a timestamp or both are
checked against a block-structured process model. The model is compiled
into integrity constraints and a bounded abductive search completes the
trace into model runs, hypothesising unlogged executions where needed.
"""

from __future__ import annotations

from .conformance import (
    LogCompletenessReport,
    Verdict,
    VerdictKind,
    check_log,
    check_log_completeness,
    classify,
)
from .engine import Explanation, Mode, SearchOptions, count_solutions, explain
from .ic import AbductiveSpec, compile_model
from .log import EventLog, ObservedEvent, Trace, parse_log, parse_trace
from .model import (
    Activity,
    And,
    CapExceeded,
    Loop,
    Observability,
    Or,
    ProcessModel,
    Seq,
    Xor,
    enumerate_runs,
    parse_model,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AbductiveSpec",
    "Activity",
    "And",
    "CapExceeded",
    "EventLog",
    "Explanation",
    "LogCompletenessReport",
    "Loop",
    "Mode",
    "Observability",
    "ObservedEvent",
    "Or",
    "ProcessModel",
    "SearchOptions",
    "Seq",
    "Trace",
    "Verdict",
    "VerdictKind",
    "Xor",
    "check_log",
    "check_log_completeness",
    "classify",
    "compile_model",
    "count_solutions",
    "enumerate_runs",
    "explain",
    "parse_log",
    "parse_model",
    "parse_trace",
    "validate",
]
