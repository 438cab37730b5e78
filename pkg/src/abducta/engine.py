"""Bounded abductive search over a compiled specification.

The search starts from the start constraint and repeatedly

1. places one pending head literal at the next run position -- an
   expectation is matched to a not yet used trace event, a hypothesis
   (ABD) is just recorded;
2. fires every constraint whose body has become complete, branching over
   its head alternatives.

The order in which pending literals are placed is what produces the
different interleavings of parallel branches, so each explanation comes
with a concrete run. Time points live in a :class:`TimeStore`; besides the
constraint atoms, consecutive run positions are ordered non-strictly so
the run agrees with the timestamps it is matched against.

An explanation exists iff every expectation got matched and every trace
event got used (the closed, prescriptive reading of fulfilment).
"""

from __future__ import annotations

import enum
import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterator

from .ic import AbductiveSpec, Conjunction, IntegrityConstraint, Kind
from .log import Trace
from .model import CapExceeded
from .solver import TimeStore

__all__ = [
    "BoundTooSmall",
    "Explanation",
    "Mode",
    "Position",
    "SearchOptions",
    "SearchResult",
    "count_solutions",
    "default_node_budget",
    "explain",
    "search",
]

BUDGET_ENV = "ABDUCTA_BUDGET_NODES"
DEFAULT_NODE_BUDGET = 5_000_000


def default_node_budget() -> int:
    value = os.environ.get(BUDGET_ENV)
    if value:
        try:
            return int(value)
        except ValueError:
            warnings.warn(f"ignoring non-integer {BUDGET_ENV}={value!r}")
    return DEFAULT_NODE_BUDGET


class BoundTooSmall(UserWarning):
    """The trace has more events than the run length bound allows."""


class Mode(enum.Enum):
    FIRST = "first"
    ALL = "all"


@dataclass(frozen=True)
class SearchOptions:
    max_len: int
    mode: Mode = Mode.ALL
    max_nodes: int | None = field(default_factory=default_node_budget)
    max_solutions: int | None = None

    def __post_init__(self) -> None:
        if self.max_len < 1:
            raise ValueError("max_len must be positive")
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class Position:
    activity: str
    kind: Kind  # EXPECTED (matched to `event`) or ABDUCED
    event: str | None = None


@dataclass
class Explanation:
    """One way of completing the trace into a run of the model.

    Store variables are named ``T<i>`` after the run position they time.
    """

    positions: tuple[Position, ...]
    store: TimeStore

    @property
    def run(self) -> tuple[str, ...]:
        return tuple(p.activity for p in self.positions)

    @property
    def abduced(self) -> list[tuple[int, str]]:
        return [(i, p.activity) for i, p in enumerate(self.positions) if p.kind is Kind.ABDUCED]

    @property
    def expected(self) -> list[tuple[int, str]]:
        return [(i, p.activity) for i, p in enumerate(self.positions) if p.kind is Kind.EXPECTED]

    @property
    def matching(self) -> dict[str, int]:
        return {p.event: i for i, p in enumerate(self.positions) if p.event is not None}

    @property
    def key(self) -> tuple:
        return (self.run, tuple(p.event for p in self.positions))

    @property
    def is_strong(self) -> bool:
        return all(p.kind is not Kind.ABDUCED for p in self.positions)

    def witness(self) -> dict[int, int]:
        """Least concrete timestamp per run position."""
        values = self.store.solve()
        return {i: values[f"T{i}"] for i in range(len(self.positions))}

    def time_range(self, index: int) -> tuple[int, int | None]:
        var = f"T{index}"
        return self.store.lower(var), self.store.upper(var)

    def relations(self, index: int) -> list[str]:
        """Strict ordering atoms that mention the given position."""
        var = f"T{index}"
        return [str(a) for a in self.store.atoms if a.strict and var in (a.left, a.right)]


def _sort_key(key: tuple) -> tuple:
    run, events = key
    return (run, tuple("" if e is None else e for e in events))


@dataclass
class SearchResult:
    explanations: list[Explanation]
    solutions: int
    nodes: int
    elapsed: float


class _State:
    __slots__ = ("positions", "pending", "waiting", "unmatched", "store", "last", "nvars")

    def clone(self) -> _State:
        s = _State.__new__(_State)
        s.positions = list(self.positions)
        s.pending = list(self.pending)
        s.waiting = {k: list(v) for k, v in self.waiting.items()}
        s.unmatched = self.unmatched
        s.store = self.store.copy()
        s.last = self.last
        s.nvars = self.nvars
        return s


class _Search:
    def __init__(self, spec: AbductiveSpec, trace: Trace, opts: SearchOptions, build: bool):
        self.spec = spec
        self.trace = trace
        self.opts = opts
        self.build = build
        self.events = list(trace.events)
        self.nodes = 0
        self.found: dict[tuple, Explanation | None] = {}
        self.done = False
        # events usable by an expectation of each activity, as bitmasks
        self.compatible: dict[str, int] = {}
        for name in spec.activities:
            mask = 0
            for i, e in enumerate(self.events):
                if e.activity is None or e.activity == name:
                    mask |= 1 << i
            self.compatible[name] = mask

    # -- driver ------------------------------------------------------------

    def run(self) -> None:
        if len(self.events) > self.opts.max_len:
            warnings.warn(
                f"trace has {len(self.events)} events but max_len is {self.opts.max_len}",
                BoundTooSmall,
                stacklevel=3,
            )
            return
        expectable = self.spec.expectable()
        if any(e.activity is not None and e.activity not in expectable for e in self.events):
            return
        root = _State()
        root.positions = []
        root.pending = []
        root.waiting = {}
        root.unmatched = (1 << len(self.events)) - 1
        root.store = TimeStore()
        root.last = None
        root.nvars = 0
        for alt in self.spec.start.head:
            st = root.clone()
            if self._apply(st, (), self.spec.start, alt, []):
                for settled in self._settle(st, []):
                    self._dfs(settled)
                    if self.done:
                        return

    def _fresh(self, st: _State) -> str:
        st.nvars += 1
        return f"v{st.nvars}"

    # -- constraint firing ---------------------------------------------------

    def _firable(self, st: _State, node: int) -> tuple[int, ...] | None:
        spec = self.spec
        for key in spec.groups_by_node.get(node, ()):
            for m, need in zip(key, spec.stages[key]):
                inst = st.waiting.get(m)
                if inst is None or inst[2] != need:
                    break
            else:
                return key
        return None

    def _apply(
        self,
        st: _State,
        key: tuple[int, ...],
        ic: IntegrityConstraint,
        alt: Conjunction,
        check: list[int],
    ) -> bool:
        """Commit to one head alternative of a fired constraint."""
        if alt.is_true:
            for n in key:
                st.waiting[n][2] += 1
            check.extend(key)
            return True
        # cheap parts of _viable, checked before any cloning happens below
        if len(st.positions) + len(st.pending) + len(alt.literals) > self.opts.max_len:
            return False
        for lit in alt.literals:
            if lit.kind is Kind.EXPECTED and not (self.compatible[lit.activity] & st.unmatched):
                return False
        names = {}
        for lit in ic.body:
            names[lit.time] = st.waiting.pop(lit.node)[0]
        for lit in alt.literals:
            var = self._fresh(st)
            names[lit.time] = var
            st.pending.append((lit.node, lit.kind, var))
        for atom in alt.atoms:
            if not st.store.add(atom.rename(names)):
                return False
        return True

    def _settle(self, st: _State, check: list[int]) -> Iterator[_State]:
        while check:
            node = check.pop()
            if node not in st.waiting:
                continue
            key = self._firable(st, node)
            if key is None:
                continue
            kinds = tuple(st.waiting[m][1] for m in key)
            ic = self.spec.groups[key][kinds]
            for alt in ic.head:
                child = st.clone()
                rest = list(check)
                if self._apply(child, key, ic, alt, rest):
                    yield from self._settle(child, rest)
            return
        yield st

    # -- placement -----------------------------------------------------------

    def _lower_bound(self, st: _State) -> int:
        after = self.spec.min_after
        lb = len(st.pending)
        for node, _, _ in st.pending:
            lb = max(lb, 1 + after[node])
        for node in st.waiting:
            lb = max(lb, after[node])
        return lb

    def _viable(self, st: _State) -> bool:
        placed = len(st.positions)
        room = self.opts.max_len - placed
        if bin(st.unmatched).count("1") > room:
            return False
        if self._lower_bound(st) > room:
            return False
        activity = self.spec.node_activity
        for node, kind, _ in st.pending:
            if kind is Kind.EXPECTED and not (self.compatible[activity[node]] & st.unmatched):
                return False
        if st.last is not None and st.unmatched:
            floor = st.store.lower(st.last)
            mask = st.unmatched
            for i, e in enumerate(self.events):
                if mask >> i & 1 and e.timestamp is not None and e.timestamp < floor:
                    return False
        return True

    def _place(self, st: _State, idx: int, event: int | None) -> bool:
        node, kind, var = st.pending.pop(idx)
        store = st.store
        store.add_var(var)
        if st.last is not None and not store.ge(var, st.last):
            return False
        eid = None
        if event is not None:
            ev = self.events[event]
            eid = ev.id
            st.unmatched &= ~(1 << event)
            if ev.timestamp is not None and not store.bind(var, ev.timestamp):
                return False
        st.positions.append((node, kind, var, eid))
        st.last = var
        st.waiting[node] = [var, Kind.HAPPENED if kind is Kind.EXPECTED else Kind.ABDUCED, 0]
        return True

    def _dfs(self, st: _State) -> None:
        self.nodes += 1
        limit = self.opts.max_nodes
        if limit is not None and self.nodes > limit:
            raise CapExceeded(f"search exceeded node budget of {limit}")
        if not st.pending:
            if not st.unmatched:
                self._emit(st)
            return
        if not self._viable(st):
            return
        activity = self.spec.node_activity
        for idx, (node, kind, _) in enumerate(st.pending):
            if kind is Kind.EXPECTED:
                mask = self.compatible[activity[node]] & st.unmatched
                options = [i for i in range(len(self.events)) if mask >> i & 1]
            else:
                options = [None]
            for event in options:
                child = st.clone()
                if not self._place(child, idx, event):
                    continue
                for settled in self._settle(child, [node]):
                    self._dfs(settled)
                    if self.done:
                        return

    def _emit(self, st: _State) -> None:
        activity = self.spec.node_activity
        run = tuple(activity[n] for n, _, _, _ in st.positions)
        key = (run, tuple(e for _, _, _, e in st.positions))
        if key in self.found:
            return
        expl = None
        if self.build:
            rename = {var: f"T{i}" for i, (_, _, var, _) in enumerate(st.positions)}
            positions = tuple(
                Position(activity[n], k, e) for n, k, _, e in st.positions
            )
            expl = Explanation(positions, st.store.renamed(rename))
        self.found[key] = expl
        cap = self.opts.max_solutions
        if cap is not None and len(self.found) > cap:
            raise CapExceeded(f"more than {cap} solutions")
        if self.opts.mode is Mode.FIRST:
            self.done = True


def search(
    spec: AbductiveSpec, trace: Trace, opts: SearchOptions, build: bool = True
) -> SearchResult:
    """Run the search and report explanations plus effort statistics."""
    started = time.perf_counter()
    s = _Search(spec, trace, opts, build)
    s.run()
    keys = sorted(s.found, key=_sort_key)
    explanations = [s.found[k] for k in keys] if build else []
    return SearchResult(explanations, len(keys), s.nodes, time.perf_counter() - started)


def explain(spec: AbductiveSpec, trace: Trace, opts: SearchOptions) -> list[Explanation]:
    """Explanations of the trace, canonically sorted (at most one in FIRST mode)."""
    return search(spec, trace, opts).explanations


def count_solutions(spec: AbductiveSpec, trace: Trace, opts: SearchOptions) -> int:
    """Number of distinct explanations, without materialising them."""
    if opts.mode is not Mode.ALL:
        opts = SearchOptions(opts.max_len, Mode.ALL, opts.max_nodes, opts.max_solutions)
    return search(spec, trace, opts, build=False).solutions
