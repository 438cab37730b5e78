from __future__ import annotations

import json
import random

import pytest

from abducta.conformance import (
    IncompleteTraceInLog,
    Verdict,
    VerdictKind,
    check_log,
    check_log_completeness,
    classify,
    model_runs,
)
from abducta.engine import Mode, SearchOptions
from abducta.log import EventLog, Trace
from abducta.model import Activity, And, Observability, ProcessModel

from conftest import load_log, load_trace
from gen import compliant_cases, masked_variants

LOOP_RUN = ("AI", "FD", "CD", "FD", "CD", "PD", "RC", "SI")


@pytest.mark.parametrize(
    "name, kind",
    [
        ("trace1.json", VerdictKind.STRONG),
        ("trace4.json", VerdictKind.CONDITIONAL),
        ("trace6.json", VerdictKind.CONDITIONAL),
        ("trace9.json", VerdictKind.NON_COMPLIANT),
    ],
)
def test_pos_verdicts(pos, name, kind):
    v = classify(pos, load_trace(name), SearchOptions(6))
    assert v.kind is kind
    assert v.compliant == (kind is not VerdictKind.NON_COMPLIANT)
    assert not v.provisional


def test_exit_codes_are_total():
    codes = {k: k.exit_code for k in VerdictKind}
    assert codes == {
        VerdictKind.STRONG: 0,
        VerdictKind.CONDITIONAL: 1,
        VerdictKind.NON_COMPLIANT: 2,
        VerdictKind.UNKNOWN: 3,
    }


def test_budget_exhaustion_is_unknown(pos):
    v = classify(pos, Trace(), SearchOptions(8, max_nodes=2))
    assert v.kind is VerdictKind.UNKNOWN
    assert "budget" in v.reason


def test_first_mode_conditional_is_provisional(pos):
    v = classify(pos, load_trace("trace6.json"), SearchOptions(6, Mode.FIRST))
    assert v.kind is VerdictKind.CONDITIONAL
    assert v.provisional


def test_invalid_model_raises(pos):
    broken = ProcessModel(pos.root, {"AI": Observability.ALWAYS})
    with pytest.raises(ValueError):
        classify(broken, Trace(), SearchOptions(3))


def test_check_log_l1_l2(pos):
    assert [v.kind for v in check_log(pos, load_log("L1.json"), SearchOptions(6))] == [
        VerdictKind.STRONG
    ] * 3
    kinds = [v.kind for v in check_log(pos, load_log("L2.json"), SearchOptions(6))]
    assert kinds == [VerdictKind.CONDITIONAL, VerdictKind.STRONG]


def test_check_log_parallel_keeps_order(pos):
    traces = [load_trace(n) for n in ("trace9.json", "trace1.json", "trace6.json", "trace4.json")]
    log = EventLog(tuple(traces))
    serial = [v.kind for v in check_log(pos, log, SearchOptions(6))]
    fanned = [v.kind for v in check_log(pos, log, SearchOptions(6), jobs=2)]
    assert serial == fanned
    assert serial[0] is VerdictKind.NON_COMPLIANT


def test_verdict_json_round_trip(pos):
    for name in ("trace1.json", "trace4.json", "trace6.json", "trace9.json"):
        v = classify(pos, load_trace(name), SearchOptions(6))
        data = json.loads(json.dumps(v.to_dict()))
        again = Verdict.from_dict(data)
        assert again.kind is v.kind
        assert [e.key for e in again.explanations] == [e.key for e in v.explanations]
        assert again.to_dict() == data


def test_report_ranges(pos):
    v = classify(pos, load_trace("trace6.json"), SearchOptions(6))
    (abduced,) = v.to_dict()["explanations"][0]["abduced"]
    assert abduced["activity"] == "PIC"
    assert abduced["range"] == [3, 8]
    assert abduced["time"] == 3


# -- log completeness ------------------------------------------------------------

def test_model_runs(pos):
    assert model_runs(pos, 6) == {
        ("AI", "DP", "SI"),
        ("AI", "GIC", "PIC", "SI"),
        ("AI", "FD", "CD", "PD", "RC", "SI"),
    }


def test_l1_is_complete(pos):
    report = check_log_completeness(pos, load_log("L1.json"), 6)
    assert report.complete
    assert report.missing_runs == []


def test_dropping_any_trace_reports_exactly_its_run(pos):
    log = load_log("L1.json")
    for i in range(len(log)):
        rest = EventLog(tuple(t for j, t in enumerate(log.traces) if j != i))
        report = check_log_completeness(pos, rest, 6)
        assert not report.complete
        assert report.missing_runs == [tuple(e.activity for e in log[i])]


def test_longer_bound_needs_loop_run(pos):
    report = check_log_completeness(pos, load_log("L1.json"), 8)
    assert report.missing_runs == [LOOP_RUN]


def test_duplicate_trace_covers_one_run(pos):
    log = load_log("L1.json")
    doubled = EventLog((log[0], log[0]))
    report = check_log_completeness(pos, doubled, 6)
    assert len(report.missing_runs) == 2


def test_tied_timestamps_match_either_order():
    m = ProcessModel.create(And(Activity("a"), Activity("b")))
    log = EventLog((Trace.of([["a", 1], ["b", 1]]), Trace.of([["b", 2], ["a", 2]])))
    assert check_log_completeness(m, log, 2).complete


def test_incomplete_trace_is_rejected(pos):
    with pytest.raises(IncompleteTraceInLog):
        check_log_completeness(pos, load_log("L2.json"), 6)


def test_report_dict(pos):
    data = check_log_completeness(pos, load_log("L1-minus-one.json"), 6).to_dict()
    assert data["complete"] is False
    assert data["missing_runs"] == [["AI", "GIC", "PIC", "SI"]]


# -- metamorphic properties (small samples; the acceptance suite runs more) ------

def test_masking_never_breaks_compliance():
    for model, trace, max_len, _ in compliant_cases(random.Random(8), 40):
        for t in masked_variants(trace):
            assert classify(model, t, SearchOptions(max_len, Mode.FIRST)).compliant, (model, t.pairs())


def test_deleting_from_strong_trace_keeps_compliance():
    for model, trace, max_len, _ in compliant_cases(random.Random(9), 40, all_possibly=True, strong=True):
        for i in range(len(trace)):
            assert classify(model, trace.without(i), SearchOptions(max_len, Mode.FIRST)).compliant
