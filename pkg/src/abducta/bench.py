"""Synthetic benchmark over observability certainty, trace size and TML.

The benchmark model is a sequence with three xor blocks, one parallel
block and one loop. For each number of observed events a ground run is
sampled and reduced to a partial trace. The trace is then checked under
every combination of

* %AOA -- the share of activities whose observability is certain
  (always or never) instead of possibly,
* TML  -- the run length bound,
* mode -- all solutions or first solution.

Certain activities are annotated consistently with the sampled run
(always when the trace shows all of their executions, never when the run
executes them but the trace shows none of them), so every trace stays
compliant and only the amount of search changes. Activities are promoted
to certain in a fixed random order, so a higher %AOA only adds
annotations to a lower one.
"""

from __future__ import annotations

import csv
import gc
import io
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .conformance import VerdictKind, classify_spec
from .engine import Mode, SearchOptions
from .ic import compile_model
from .log import Trace
from .model import Activity, And, Block, Loop, Observability, ProcessModel, Seq, Xor

__all__ = [
    "BenchConfig",
    "BenchRow",
    "CSV_FIELDS",
    "TIE_TOLERANCE",
    "assign_observability",
    "partial_trace",
    "rows_to_csv",
    "run_bench",
    "sample_run",
    "synthetic_model",
    "trend_violations",
    "unknown_rows",
    "worst_aoa_ratio",
]

MIN_ACTIVITIES = 24


@dataclass
class BenchConfig:
    seed: int = 0
    n_activities: int = 29
    pct_aoa: list[int] = field(default_factory=lambda: [0, 25, 50])
    num_observed: list[int] = field(default_factory=lambda: [1, 5, 10])
    tml: list[int] = field(default_factory=lambda: [22, 24, 26])
    modes: list[str] = field(default_factory=lambda: ["all", "first"])
    repetitions: int = 3
    wildcards: int = 1
    max_nodes: int | None = None

    def problems(self) -> list[str]:
        out = []
        if self.n_activities < MIN_ACTIVITIES:
            out.append(f"n_activities must be at least {MIN_ACTIVITIES}")
        if any(not 0 <= p <= 100 for p in self.pct_aoa):
            out.append("pct_aoa values must lie in [0, 100]")
        if any(t < 1 for t in self.tml):
            out.append("tml values must be positive")
        if any(k < 0 for k in self.num_observed):
            out.append("num_observed values must be non-negative")
        if self.tml and any(k > min(self.tml) for k in self.num_observed):
            out.append("num_observed must not exceed the smallest tml")
        if any(m not in ("all", "first") for m in self.modes):
            out.append("modes must be 'all' or 'first'")
        if self.repetitions < 1:
            out.append("repetitions must be positive")
        if self.wildcards < 0:
            out.append("wildcards must be non-negative")
        return out


@dataclass
class BenchRow:
    pct_aoa: int
    num_observed: int
    tml: int
    mode: str
    verdict: str
    solutions: int
    elapsed: float  # fastest repetition, seconds
    median_elapsed: float
    nodes: int


CSV_FIELDS = [f for f in BenchRow.__dataclass_fields__]


def synthetic_model(n_activities: int = 29) -> ProcessModel:
    """Admission-like model: xor, parallel block, loop, xor, xor, then a tail."""
    if n_activities < MIN_ACTIVITIES:
        raise ValueError(f"need at least {MIN_ACTIVITIES} activities")
    names = iter(f"A{i:02d}" for i in range(1, n_activities + 1))

    def a(k: int = 1) -> list[Block]:
        return [Activity(next(names)) for _ in range(k)]

    def seq(k: int) -> Block:
        return Seq(a(k)) if k > 1 else a(1)[0]

    root_parts: list[Block] = a(1)
    root_parts.append(Xor(seq(3), seq(2)))
    root_parts.append(And(seq(3), seq(2)))
    root_parts.append(Loop(seq(2)))
    root_parts.append(Xor(seq(2), seq(3)))
    root_parts.append(Xor(seq(3), seq(2)))
    # whatever is left forms the tail of the process
    root_parts.extend(Activity(n) for n in names)
    return ProcessModel.create(Seq(root_parts))


def sample_run(model: ProcessModel, rng: random.Random, max_len: int) -> tuple[str, ...]:
    """Random ground run of length at most max_len (loop taken 1 or 2 times)."""

    def walk(block: Block) -> list[str]:
        if isinstance(block, Activity):
            return [block.name]
        if isinstance(block, Seq):
            return [x for c in block.children for x in walk(c)]
        if isinstance(block, Xor):
            return walk(rng.choice(block.children))
        if isinstance(block, Loop):
            return [x for _ in range(rng.choice((1, 2))) for x in walk(block.body)]
        # And / Or: interleave the branch runs at random
        branches = list(block.children)
        if not isinstance(block, And):
            branches = rng.sample(branches, rng.randint(1, len(branches)))
        queues = [walk(c) for c in branches]
        out = []
        while any(queues):
            q = rng.choice([q for q in queues if q])
            out.append(q.pop(0))
        return out

    for _ in range(1000):
        run = tuple(walk(model.root))
        if len(run) <= max_len:
            return run
    raise ValueError(f"could not sample a run of length <= {max_len}")


def partial_trace(
    run: Sequence[str], rng: random.Random, num_observed: int, wildcards: int
) -> tuple[Trace, list[str]]:
    """Keep `num_observed` events of the run, then blank `wildcards` fields.

    Returns the trace and the ground activity names of the kept events.
    """
    if num_observed > len(run):
        raise ValueError(f"cannot observe {num_observed} events of a {len(run)}-step run")
    keep = sorted(rng.sample(range(len(run)), num_observed))
    pairs = [[run[i], i + 1] for i in keep]
    kept = [run[i] for i in keep]
    for i in rng.sample(range(len(pairs)), min(wildcards, len(pairs))):
        shape = rng.choice(("activity", "timestamp", "both"))
        if shape in ("activity", "both"):
            pairs[i][0] = None
        if shape in ("timestamp", "both"):
            pairs[i][1] = None
    return Trace.of(pairs), kept


def assign_observability(
    model: ProcessModel,
    run: Sequence[str],
    kept: Sequence[str],
    order: Sequence[str],
    pct_aoa: int,
) -> dict[str, Observability]:
    """Annotate the first pct_aoa% of `order` with a certain observability.

    `kept` lists the ground activity names of the events that made it into
    the trace. An activity with only some of its executions kept has no
    consistent certain annotation and stays possibly observable.
    """
    target = round(len(order) * pct_aoa / 100)
    obs = {name: Observability.POSSIBLY for name in model.activity_names}
    for name in order[:target]:
        executed, visible = run.count(name), kept.count(name)
        if visible == executed:
            # includes activities off the sampled run: declaring them
            # always logged rules out every alternative that uses them
            obs[name] = Observability.ALWAYS
        elif visible == 0:
            obs[name] = Observability.NEVER
    return obs


def _measure(jobs: list, trace: Trace, repetitions: int) -> list[tuple]:
    """Verdict plus wall times for each (spec, options) job.

    Every job runs once untimed, then the timed repetitions go round-robin
    over the jobs so slow drift of the machine hits all of them alike. The
    collector is paused while timing, as timeit does.
    """
    verdicts = [classify_spec(spec, trace, opts) for spec, opts in jobs]
    times: list[list[float]] = [[] for _ in jobs]
    enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        for _ in range(repetitions):
            for i, (spec, opts) in enumerate(jobs):
                started = time.perf_counter()
                verdicts[i] = classify_spec(spec, trace, opts)
                times[i].append(time.perf_counter() - started)
    finally:
        if enabled:
            gc.enable()
    return list(zip(verdicts, times))


def run_bench(config: BenchConfig) -> list[BenchRow]:
    problems = config.problems()
    if problems:
        raise ValueError("; ".join(problems))
    rng = random.Random(config.seed)
    model = synthetic_model(config.n_activities)
    order = list(model.activity_names)
    rng.shuffle(order)
    shortest_tml = min(config.tml)
    budget = {} if config.max_nodes is None else {"max_nodes": config.max_nodes}
    rows: list[BenchRow] = []
    for num_observed in config.num_observed:
        run = sample_run(model, rng, shortest_tml)
        while len(run) < num_observed:
            run = sample_run(model, rng, shortest_tml)
        trace, kept = partial_trace(run, rng, num_observed, config.wildcards)
        specs = {
            pct: compile_model(
                model.with_observability(assign_observability(model, run, kept, order, pct))
            )
            for pct in config.pct_aoa
        }
        for tml in config.tml:
            cells = [(pct, mode) for pct in config.pct_aoa for mode in config.modes]
            jobs = [(specs[pct], SearchOptions(tml, Mode(mode), **budget)) for pct, mode in cells]
            for (pct, mode), (verdict, times) in zip(cells, _measure(jobs, trace, config.repetitions)):
                rows.append(BenchRow(
                    pct_aoa=pct,
                    num_observed=num_observed,
                    tml=tml,
                    mode=mode,
                    verdict=verdict.kind.value,
                    solutions=verdict.solutions,
                    elapsed=min(times),
                    median_elapsed=statistics.median(times),
                    nodes=verdict.nodes,
                ))
    rows.sort(key=lambda r: (
        config.num_observed.index(r.num_observed),
        config.pct_aoa.index(r.pct_aoa),
        config.tml.index(r.tml),
        config.modes.index(r.mode),
    ))
    return rows


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row))
    return buf.getvalue()


def unknown_rows(rows: Sequence[BenchRow]) -> list[BenchRow]:
    return [r for r in rows if r.verdict == VerdictKind.UNKNOWN.value]


TIE_TOLERANCE = 0.05


def trend_violations(rows: Sequence[BenchRow], tie_tolerance: float = TIE_TOLERANCE) -> list[str]:
    """Rows breaking the expected effort trends; empty when all hold.

    * all-solutions search takes at least as long as first-solution search
      on the same input (fastest repetition of each);
    * the solution count does not drop as TML grows;
    * the median time of all-solutions search does not grow as %AOA grows.
      First-solution search descends to one completion in well under a
      millisecond whatever the annotations, so its timings only carry noise.
      Medians within `tie_tolerance` (relative) of each other count as a
      tie: where extra annotations prune almost nothing the two timings
      differ by scheduler noise only.
    """
    out = []
    by_key = {(r.pct_aoa, r.num_observed, r.tml, r.mode): r for r in rows}
    for (pct, k, tml, mode), row in sorted(by_key.items()):
        if mode != "all":
            continue
        first = by_key.get((pct, k, tml, "first"))
        if first is not None and row.elapsed < first.elapsed:
            out.append(
                f"aoa={pct} oe={k} tml={tml}: all {row.elapsed:.6f}s < first {first.elapsed:.6f}s"
            )
    groups: dict[tuple, list[BenchRow]] = {}
    for r in rows:
        if r.mode == "all":
            groups.setdefault((r.pct_aoa, r.num_observed), []).append(r)
    for (pct, k), series in sorted(groups.items()):
        series.sort(key=lambda r: r.tml)
        for a, b in zip(series, series[1:]):
            if b.solutions < a.solutions:
                out.append(
                    f"aoa={pct} oe={k}: #sol drops from {a.solutions} (tml={a.tml}) "
                    f"to {b.solutions} (tml={b.tml})"
                )
    groups = {}
    for r in rows:
        if r.mode == "all":
            groups.setdefault((r.num_observed, r.tml, r.mode), []).append(r)
    for (k, tml, mode), series in sorted(groups.items()):
        series.sort(key=lambda r: r.pct_aoa)
        for a, b in zip(series, series[1:]):
            if b.median_elapsed > a.median_elapsed * (1 + tie_tolerance):
                out.append(
                    f"oe={k} tml={tml} {mode}: median {b.median_elapsed:.6f}s at aoa={b.pct_aoa} "
                    f"> {a.median_elapsed:.6f}s at aoa={a.pct_aoa}"
                )
    return out


def worst_aoa_ratio(rows: Sequence[BenchRow]) -> float:
    """Largest median ratio between consecutive %AOA levels (all mode)."""
    groups: dict[tuple, list[BenchRow]] = {}
    for r in rows:
        if r.mode == "all":
            groups.setdefault((r.num_observed, r.tml), []).append(r)
    worst = 0.0
    for series in groups.values():
        series.sort(key=lambda r: r.pct_aoa)
        for a, b in zip(series, series[1:]):
            if a.median_elapsed > 0:
                worst = max(worst, b.median_elapsed / a.median_elapsed)
    return worst
