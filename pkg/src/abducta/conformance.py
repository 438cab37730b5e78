"""Compliance verdicts for traces and completeness checks for logs."""

from __future__ import annotations

import enum
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import groupby
from typing import Any, Sequence

import networkx as nx

from .engine import Explanation, Mode, Position, SearchOptions, search
from .ic import AbductiveSpec, Kind, compile_model
from .log import EventLog, Trace
from .model import CapExceeded, Observability, ProcessModel, Run, validate
from .solver import TimeAtom, TimeStore

__all__ = [
    "IncompleteTraceInLog",
    "LogCompletenessReport",
    "Verdict",
    "VerdictKind",
    "check_log",
    "check_log_completeness",
    "classify",
    "classify_spec",
    "explanation_from_dict",
    "explanation_to_dict",
]


class IncompleteTraceInLog(ValueError):
    pass


class VerdictKind(enum.Enum):
    STRONG = "strong"
    CONDITIONAL = "conditional"
    NON_COMPLIANT = "non-compliant"
    UNKNOWN = "unknown"

    @property
    def exit_code(self) -> int:
        return _EXIT[self]


_EXIT = {
    VerdictKind.STRONG: 0,
    VerdictKind.CONDITIONAL: 1,
    VerdictKind.NON_COMPLIANT: 2,
    VerdictKind.UNKNOWN: 3,
}


@dataclass
class Verdict:
    kind: VerdictKind
    explanations: list[Explanation] = field(default_factory=list)
    solutions: int = 0
    nodes: int = 0
    elapsed: float = 0.0
    # FIRST mode cannot tell conditional from strong unless it hit a strong one
    provisional: bool = False
    reason: str | None = None

    @property
    def compliant(self) -> bool:
        return self.kind in (VerdictKind.STRONG, VerdictKind.CONDITIONAL)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "provisional": self.provisional,
            "reason": self.reason,
            "explanations": [explanation_to_dict(e) for e in self.explanations],
            "stats": {"solutions": self.solutions, "nodes": self.nodes, "elapsed": self.elapsed},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Verdict:
        stats = data.get("stats", {})
        return cls(
            kind=VerdictKind(data["kind"]),
            explanations=[explanation_from_dict(e) for e in data.get("explanations", [])],
            solutions=stats.get("solutions", 0),
            nodes=stats.get("nodes", 0),
            elapsed=stats.get("elapsed", 0.0),
            provisional=data.get("provisional", False),
            reason=data.get("reason"),
        )


def explanation_to_dict(e: Explanation) -> dict[str, Any]:
    witness = e.witness()
    abduced = []
    for i, activity in e.abduced:
        lo, hi = e.time_range(i)
        abduced.append({
            "position": i,
            "activity": activity,
            "time": witness[i],
            "range": [lo, hi],
            "constraints": e.relations(i),
        })
    matching = [
        {"event": p.event, "position": i, "activity": p.activity, "time": witness[i]}
        for i, p in enumerate(e.positions)
        if p.event is not None
    ]
    return {
        "run": list(e.run),
        "abduced": abduced,
        "matching": matching,
        "store": {
            "bindings": dict(sorted(e.store.bindings.items())),
            "atoms": [[a.left, a.right, a.strict] for a in e.store.atoms],
        },
    }


def explanation_from_dict(data: dict[str, Any]) -> Explanation:
    run = data["run"]
    by_position = {m["position"]: m["event"] for m in data.get("matching", [])}
    positions = tuple(
        Position(a, Kind.EXPECTED if i in by_position else Kind.ABDUCED, by_position.get(i))
        for i, a in enumerate(run)
    )
    raw = data.get("store", {})
    store = TimeStore()
    for i in range(len(run)):
        store.add_var(f"T{i}")
    for var, value in raw.get("bindings", {}).items():
        store.bind(var, value)
    for left, right, strict in raw.get("atoms", []):
        store.add(TimeAtom(left, right, strict))
    return Explanation(positions, store)


# -- trace classification -------------------------------------------------------

def classify_spec(spec: AbductiveSpec, trace: Trace, opts: SearchOptions) -> Verdict:
    started = time.perf_counter()
    try:
        result = search(spec, trace, opts)
    except CapExceeded as exc:
        return Verdict(
            VerdictKind.UNKNOWN,
            elapsed=time.perf_counter() - started,
            reason=str(exc),
        )
    found = result.explanations
    if not found:
        kind = VerdictKind.NON_COMPLIANT
    elif any(e.is_strong for e in found):
        kind = VerdictKind.STRONG
    else:
        kind = VerdictKind.CONDITIONAL
    return Verdict(
        kind,
        explanations=found,
        solutions=result.solutions,
        nodes=result.nodes,
        elapsed=result.elapsed,
        provisional=kind is VerdictKind.CONDITIONAL and opts.mode is Mode.FIRST,
    )


def classify(model: ProcessModel, trace: Trace, opts: SearchOptions) -> Verdict:
    """Strong, conditional or non-compliance of one trace."""
    problems = validate(model)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    return classify_spec(compile_model(model), trace, opts)


def _classify_job(args) -> Verdict:
    spec, trace, opts = args
    return classify_spec(spec, trace, opts)


def check_log(
    model: ProcessModel, log: EventLog, opts: SearchOptions, jobs: int = 1
) -> list[Verdict]:
    """One verdict per trace, in log order."""
    spec = compile_model(model)
    work = [(spec, t, opts) for t in log.traces]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_classify_job, work))
    return [_classify_job(w) for w in work]


# -- log completeness -----------------------------------------------------------

@dataclass
class LogCompletenessReport:
    complete: bool
    missing_runs: list[Run]
    matched: dict[Run, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "complete": self.complete,
            "missing_runs": [list(r) for r in self.missing_runs],
            "matched": [{"run": list(r), "trace": i} for r, i in sorted(self.matched.items())],
        }


def _trace_fits(trace: Trace, run: Sequence[str]) -> bool:
    """Does some timestamp-respecting order of the trace spell `run`?"""
    if len(trace) != len(run):
        return False
    ordered = sorted(trace.events, key=lambda e: e.timestamp)
    pos = 0
    for _, group in groupby(ordered, key=lambda e: e.timestamp):
        names = sorted(e.activity for e in group)
        if names != sorted(run[pos:pos + len(names)]):
            return False
        pos += len(names)
    return True


def model_runs(model: ProcessModel, max_len: int, opts: SearchOptions | None = None) -> set[Run]:
    """Runs of the model, obtained by explaining the empty trace with every
    activity treated as never observable."""
    spec = compile_model(model.with_observability(Observability.NEVER))
    opts = opts or SearchOptions(max_len)
    result = search(spec, Trace(), SearchOptions(max_len, Mode.ALL, opts.max_nodes))
    return {e.run for e in result.explanations}


def check_log_completeness(
    model: ProcessModel, log: EventLog, max_len: int
) -> LogCompletenessReport:
    """Does every run up to max_len have its own matching trace in the log?"""
    for i, trace in enumerate(log.traces):
        if not trace.is_complete:
            raise IncompleteTraceInLog(f"trace {i} has events with missing activity or timestamp")
    runs = sorted(model_runs(model, max_len))
    graph = nx.Graph()
    run_nodes = [("run", r) for r in runs]
    graph.add_nodes_from(run_nodes)
    graph.add_nodes_from(("trace", i) for i in range(len(log)))
    for r in runs:
        for i, trace in enumerate(log.traces):
            if _trace_fits(trace, r):
                graph.add_edge(("run", r), ("trace", i))
    pairing = nx.bipartite.maximum_matching(graph, top_nodes=run_nodes)
    matched = {r: pairing[("run", r)][1] for r in runs if ("run", r) in pairing}
    missing = [r for r in runs if r not in matched]
    return LogCompletenessReport(not missing, missing, matched)
