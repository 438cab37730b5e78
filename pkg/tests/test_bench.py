from __future__ import annotations

import csv
import io
import random
from dataclasses import asdict

import pytest

from abducta.bench import (
    CSV_FIELDS,
    BenchConfig,
    BenchRow,
    assign_observability,
    partial_trace,
    rows_to_csv,
    run_bench,
    sample_run,
    synthetic_model,
    trend_violations,
    worst_aoa_ratio,
)
from abducta.model import And, Loop, Observability, accepts, validate

SMOKE = dict(pct_aoa=[50], num_observed=[3], tml=[22], modes=["all", "first"], repetitions=1)


def test_synthetic_model_shape():
    m = synthetic_model()
    assert validate(m) == []
    assert len(m.activity_names) == 29
    kinds = [type(c) for c in m.root.children]
    assert kinds.count(Loop) == 1 and kinds.count(And) == 1


def test_synthetic_model_needs_enough_activities():
    with pytest.raises(ValueError):
        synthetic_model(10)


def test_sampled_runs_are_model_runs():
    m = synthetic_model()
    rng = random.Random(1)
    for _ in range(20):
        run = sample_run(m, rng, 26)
        assert accepts(m.root, run)
        assert len(run) <= 26


def test_partial_trace_keeps_order_and_degrades():
    m = synthetic_model()
    rng = random.Random(2)
    run = sample_run(m, rng, 26)
    trace, kept = partial_trace(run, rng, 6, wildcards=2)
    assert len(trace) == 6
    gaps = sum(p.count(None) for p in trace.pairs())
    assert gaps >= 2
    stamps = [p[1] for p in trace.pairs() if p[1] is not None]
    assert stamps == sorted(stamps)
    assert all(name in run for name in kept)


def test_observability_assignment_respects_the_trace():
    m = synthetic_model()
    rng = random.Random(3)
    run = sample_run(m, rng, 26)
    _, kept = partial_trace(run, rng, 5, wildcards=0)
    order = sorted(m.activity_names)
    for pct in (0, 50, 100):
        obs = assign_observability(m, run, kept, order, pct)
        fixed = [a for a, o in obs.items() if o is not Observability.POSSIBLY]
        assert len(fixed) <= round(len(order) * pct / 100)
        for a in fixed:
            if obs[a] is Observability.NEVER:
                assert a not in kept
            else:
                assert kept.count(a) == run.count(a)


def test_smoke_run_completes():
    rows = run_bench(BenchConfig(**SMOKE))
    assert len(rows) == 2
    assert all(r.verdict in ("strong", "conditional") for r in rows)
    assert all(r.solutions >= 1 for r in rows)


def test_non_time_columns_are_deterministic():
    def stable(rows):
        return [(r.pct_aoa, r.num_observed, r.tml, r.mode, r.verdict, r.solutions, r.nodes) for r in rows]

    assert stable(run_bench(BenchConfig(**SMOKE))) == stable(run_bench(BenchConfig(**SMOKE)))


def test_csv_round_trip():
    rows = run_bench(BenchConfig(**SMOKE))
    parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
    assert list(parsed[0]) == CSV_FIELDS
    assert [int(r["solutions"]) for r in parsed] == [r.solutions for r in rows]


@pytest.mark.parametrize(
    "change",
    [
        {"pct_aoa": [120]},
        {"num_observed": [30], "tml": [22]},
        {"n_activities": 5},
        {"modes": ["some"]},
        {"repetitions": 0},
    ],
)
def test_config_problems(change):
    assert BenchConfig(**change).problems()
    with pytest.raises(ValueError):
        run_bench(BenchConfig(**change))


def _row(**kw):
    base = dict(pct_aoa=0, num_observed=1, tml=22, mode="all", verdict="strong",
                solutions=1, elapsed=1.0, median_elapsed=1.0, nodes=10)
    base.update(kw)
    return BenchRow(**base)


def test_trend_checker_flags_each_trend():
    assert trend_violations([_row(), _row(mode="first", elapsed=0.5)]) == []
    assert trend_violations([_row(elapsed=0.1), _row(mode="first", elapsed=0.5)])
    assert trend_violations([_row(solutions=3), _row(tml=24, solutions=2)])
    assert trend_violations([_row(median_elapsed=1.0), _row(pct_aoa=25, median_elapsed=2.0)])
    # a sub-tolerance difference is a tie, unless the tolerance is dropped
    close = [_row(median_elapsed=1.0), _row(pct_aoa=25, median_elapsed=1.02)]
    assert trend_violations(close) == []
    assert trend_violations(close, tie_tolerance=0.0)
    assert worst_aoa_ratio(close) == pytest.approx(1.02)
    # first-mode medians are not compared across %AOA
    assert trend_violations([
        _row(mode="first", median_elapsed=0.1),
        _row(mode="first", pct_aoa=25, median_elapsed=0.2),
    ]) == []
    assert asdict(_row())["mode"] == "all"
