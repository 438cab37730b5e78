from __future__ import annotations

import random

import pytest

from abducta.conformance import VerdictKind
from abducta.engine import SearchOptions, search
from abducta.ic import compile_model
from abducta.log import Trace
from abducta.model import Activity, And, CapExceeded, Loop, ProcessModel, Seq, Xor
from abducta.oracle import brute_force, derivations

from conftest import load_trace
from gen import random_case


def test_pos_ground_trace(pos):
    r = brute_force(pos, load_trace("trace1.json"), 6)
    assert r.kind is VerdictKind.STRONG
    assert len(r.witnesses) == 1


def test_pos_missing_pic(pos):
    r = brute_force(pos, load_trace("trace6.json"), 6)
    assert r.kind is VerdictKind.CONDITIONAL
    ((run, slots),) = r.witnesses
    assert run == ("AI", "GIC", "PIC", "SI")
    assert slots == ("e0", "e1", None, "e2")


def test_pos_rejects_trace9(pos):
    r = brute_force(pos, load_trace("trace9.json"), 6)
    assert r.kind is VerdictKind.NON_COMPLIANT
    assert r.witnesses == set()


def test_derivation_orders():
    (steps, before), = derivations(Seq(Activity("a"), Activity("b")), 2)
    assert steps == ("a", "b") and before == {(0, 1)}
    par = derivations(And(Activity("a"), Activity("b")), 2)
    assert {d[0] for d in par} == {("a", "b"), ("b", "a")}
    assert all(d[1] == frozenset() for d in par)
    loops = derivations(Loop(Activity("a")), 3)
    assert sorted(d[0] for d in loops) == [("a",), ("a", "a"), ("a", "a", "a")]


def test_activity_cap():
    m = ProcessModel.create(Xor([Activity(f"x{i}") for i in range(11)]))
    with pytest.raises(CapExceeded):
        brute_force(m, Trace(), 1)


def test_time_bound_saturates():
    rng = random.Random(21)
    checked = 0
    while checked < 60:
        model, trace, max_len = random_case(rng)
        if len(trace) > 4:
            continue
        base = brute_force(model, trace, max_len)
        wider = brute_force(model, trace, max_len, time_bound=40)
        assert base.kind is wider.kind
        assert base.witnesses == wider.witnesses
        checked += 1


def test_engine_agrees_on_a_small_slice():
    rng = random.Random(99)
    for _ in range(60):
        model, trace, max_len = random_case(rng)
        found = search(compile_model(model), trace, SearchOptions(max_len))
        assert {e.key for e in found.explanations} == brute_force(model, trace, max_len).witnesses
