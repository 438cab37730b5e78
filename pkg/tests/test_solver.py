from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abducta.solver import Inconsistent, TimeAtom, TimeStore

from stores import brute_force, build, random_store


def test_strict_cycle_is_inconsistent():
    s = TimeStore()
    assert s.gt("T2", "T1")
    assert not s.gt("T1", "T2")
    with pytest.raises(Inconsistent):
        s.solve()


def test_unique_integer_in_open_interval():
    s = TimeStore.of([TimeAtom("T", 3), TimeAtom(5, "T")])
    assert s.consistent
    assert s.solve()["T"] == 4
    assert (s.lower("T"), s.upper("T")) == (4, 4)


def test_trace6_hypotheses():
    # GIC after AI=1, PIC between GIC and SI
    def store(t3):
        return TimeStore.of(
            [TimeAtom("GIC", "AI"), TimeAtom("PIC", "GIC"), TimeAtom("SI", "PIC")],
            {"AI": 1, "SI": t3},
        )

    assert not store(3).consistent
    ok = store(4)
    assert ok.consistent
    assert ok.solve() == {"AI": 1, "SI": 4, "GIC": 2, "PIC": 3}


def test_least_solution():
    assert TimeStore.of([TimeAtom("T2", "T1")]).solve() == {"T1": 0, "T2": 1}
    assert TimeStore.of([TimeAtom("T", 3)]).solve() == {"T": 4}


def test_trace4_hypothesis():
    def store(t2):
        return TimeStore.of(
            [TimeAtom("GIC", "AI"), TimeAtom("PIC", "GIC")], {"AI": 1, "PIC": t2}
        )

    with pytest.raises(Inconsistent):
        store(2).solve()
    assert store(3).solve()["GIC"] == 2


def test_non_strict_allows_ties():
    s = TimeStore.of([TimeAtom("a", "b", strict=False), TimeAtom("b", "a", strict=False)])
    assert s.consistent
    assert s.solve() == {"a": 0, "b": 0}
    assert not s.gt("a", "b")


def test_binding_conflicts():
    s = TimeStore()
    assert s.bind("x", 3)
    assert not s.bind("x", 4)
    assert not TimeStore().bind("y", -1)


def test_upper_unbounded_and_bounded():
    s = TimeStore.of([TimeAtom("y", "x"), TimeAtom(10, "y")])
    assert s.upper("x") == 8
    assert s.upper("y") == 9
    assert TimeStore.of([TimeAtom("y", "x")]).upper("y") is None


def test_renamed_keeps_meaning():
    s = TimeStore.of([TimeAtom("v1", "v2")], {"v2": 4})
    r = s.renamed({"v1": "T1", "v2": "T0"})
    assert r.solve() == {"T0": 4, "T1": 5}


# -- random stores against brute force ------------------------------------------

def test_random_stores_agree_with_brute_force():
    rng = random.Random(2024)
    for _ in range(1000):
        names, atoms, bindings = random_store(rng)
        store = build(names, atoms, bindings)
        expected = brute_force(names, atoms, bindings)
        assert store.consistent == (expected is not None), (atoms, bindings)
        if expected is None:
            continue
        lo, hi = expected
        least = store.solve()
        assert store.satisfied_by(least)
        assert least == lo
        for n in names:
            top = store.upper(n)
            if top is not None:
                assert top == hi[n]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_assertion_order_does_not_matter(seed, shuffler):
    names, atoms, bindings = random_store(random.Random(seed))
    order = list(range(len(atoms) + len(bindings)))
    shuffler.shuffle(order)
    a = build(names, atoms, bindings)
    b = build(names, atoms, bindings, order)
    assert a.consistent == b.consistent
    if a.consistent:
        assert a.solve() == b.solve()


def test_copy_is_independent():
    s = TimeStore.of([TimeAtom("x", 1)])
    c = s.copy()
    c.add(TimeAtom(1, "x"))
    assert s.consistent and not c.consistent
    assert list(itertools.islice(s.atoms, 5)) == [TimeAtom("x", 1)]
