"""Translation of a block-structured model into integrity constraints.

Each constraint links executions (happened events or hypotheses) to the
executions they make necessary next::

    H(a,T0) -> E(b,T1) & T1>T0 | ABD(b,T1) & T1>T0

Body literals come from ``tau`` (H for logged activities, ABD for never
logged ones, one constraint per combination for possibly logged ones);
head literals come from ``epsilon`` (E or ABD, a disjunction of both for
possibly logged activities).

Or-blocks are rewritten into an xor over the non-empty subsets of their
branches, each subset run in parallel. Every leaf of the rewritten tree is
a *node*; node ids are what the engine tracks, activity names are what
the trace mentions.

A loop's exit carries an xor-split between re-entering the body and
proceeding. When nothing follows the loop in its own thread (end of the
process, or end of a parallel branch), proceeding is the empty alternative
``true``; such constraints are *gates*: taking ``true`` keeps the body
literals alive for the enclosing and-join instead of consuming them.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import (
    Activity,
    And,
    Block,
    CapExceeded,
    Loop,
    Observability,
    Or,
    ProcessModel,
    Seq,
    Xor,
    validate,
)
from .solver import TimeAtom

__all__ = [
    "AbductiveSpec",
    "Conjunction",
    "IntegrityConstraint",
    "Kind",
    "Literal",
    "compile_model",
    "dump",
    "epsilon",
    "tau",
]

DEFAULT_ALT_CAP = 1024


class Kind(enum.Enum):
    HAPPENED = "H"
    EXPECTED = "E"
    ABDUCED = "ABD"


@dataclass(frozen=True)
class Literal:
    kind: Kind
    activity: str
    time: str
    node: int = -1

    def __str__(self) -> str:
        return f"{self.kind.value}({self.activity},{self.time})"


@dataclass(frozen=True)
class Conjunction:
    literals: tuple[Literal, ...] = ()
    atoms: tuple[TimeAtom, ...] = ()

    @property
    def is_true(self) -> bool:
        return not self.literals and not self.atoms

    def __str__(self) -> str:
        parts = [str(x) for x in self.literals] + [str(a) for a in self.atoms]
        return " & ".join(parts) if parts else "true"


@dataclass(frozen=True)
class IntegrityConstraint:
    body: tuple[Literal, ...]
    head: tuple[Conjunction, ...]

    @property
    def is_denial(self) -> bool:
        return not self.head

    @property
    def is_gate(self) -> bool:
        return any(alt.is_true for alt in self.head)

    def __str__(self) -> str:
        body = " & ".join(str(x) for x in self.body) if self.body else "true"
        head = " | ".join(str(alt) for alt in self.head) if self.head else "false"
        return f"{body} -> {head}"


def tau(activity: str, obs: Observability, time: str = "T") -> tuple[Literal, ...]:
    """Body templates for an execution of `activity`."""
    return tuple(Literal(k, activity, time) for k in _TAU[obs])


def epsilon(activity: str, obs: Observability, time: str = "T") -> tuple[Literal, ...]:
    """Head templates for an expected execution of `activity` (disjunctive)."""
    return tuple(Literal(k, activity, time) for k in _EPSILON[obs])


_TAU = {
    Observability.ALWAYS: (Kind.HAPPENED,),
    Observability.NEVER: (Kind.ABDUCED,),
    Observability.POSSIBLY: (Kind.HAPPENED, Kind.ABDUCED),
}
_EPSILON = {
    Observability.ALWAYS: (Kind.EXPECTED,),
    Observability.NEVER: (Kind.ABDUCED,),
    Observability.POSSIBLY: (Kind.EXPECTED, Kind.ABDUCED),
}


@dataclass
class AbductiveSpec:
    """Compiled constraints plus the node table the engine needs.

    The knowledge base is always empty and the abducibles are fixed to
    ABD/2 and E/2.
    """

    ics: tuple[IntegrityConstraint, ...]
    node_activity: dict[int, str]
    observability: dict[str, Observability]
    min_after: dict[int, int]
    # per constraint body (node tuple): how many gates each member must have
    # passed before the constraint may consume it; absent means none
    stages: dict[tuple[int, ...], tuple[int, ...]] = field(default_factory=dict)
    kb: tuple = ()
    abducibles: tuple[str, ...] = ("ABD/2", "E/2")

    # derived indexes
    start: IntegrityConstraint = field(init=False)
    groups: dict[tuple[int, ...], dict[tuple[Kind, ...], IntegrityConstraint]] = field(
        init=False, repr=False
    )
    groups_by_node: dict[int, list[tuple[int, ...]]] = field(init=False, repr=False)
    gate_groups: set[tuple[int, ...]] = field(init=False, repr=False)
    _expectable: set[str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        starts = [ic for ic in self.ics if not ic.body]
        if len(starts) != 1:
            raise ValueError("exactly one start constraint expected")
        self.start = starts[0]
        self.groups = {}
        self.groups_by_node = {}
        self.gate_groups = set()
        for ic in self.ics:
            if not ic.body:
                continue
            key = tuple(lit.node for lit in ic.body)
            variants = self.groups.setdefault(key, {})
            variants[tuple(lit.kind for lit in ic.body)] = ic
            if ic.is_gate:
                self.gate_groups.add(key)
            if len(variants) == 1:
                for node in key:
                    self.groups_by_node.setdefault(node, []).append(key)
            self.stages.setdefault(key, (0,) * len(key))
        self._expectable = self._collect_expectable()

    @property
    def activities(self) -> set[str]:
        return set(self.node_activity.values())

    def expectable(self) -> set[str]:
        """Activities that some head may expect (i.e. that may be logged)."""
        return set(self._expectable)

    def _collect_expectable(self) -> set[str]:
        return {
            lit.activity
            for ic in self.ics
            for alt in ic.head
            for lit in alt.literals
            if lit.kind is Kind.EXPECTED
        }


# -- Or expansion into a node tree ----------------------------------------------

class _Nodes:
    def __init__(self) -> None:
        self.activity: dict[int, str] = {}

    def new(self, name: str) -> int:
        node = len(self.activity)
        self.activity[node] = name
        return node


def _expand(block: Block, nodes: _Nodes, cap: int):
    """Rewrite into ('act', n) | ('seq'|'xor'|'and', [..]) | ('loop', body)."""
    if isinstance(block, Activity):
        return ("act", nodes.new(block.name))
    if isinstance(block, Loop):
        return ("loop", _expand(block.body, nodes, cap))
    if isinstance(block, Seq):
        return ("seq", [_expand(c, nodes, cap) for c in block.children])
    if isinstance(block, Xor):
        return ("xor", [_expand(c, nodes, cap) for c in block.children])
    if isinstance(block, And):
        return ("and", [_expand(c, nodes, cap) for c in block.children])
    if isinstance(block, Or):
        n = len(block.children)
        if 2 ** n - 1 > cap:
            raise CapExceeded(f"or-block with {n} branches exceeds {cap} alternatives")
        options = []
        for k in range(1, n + 1):
            for subset in itertools.combinations(block.children, k):
                parts = [_expand(c, nodes, cap) for c in subset]
                options.append(parts[0] if k == 1 else ("and", parts))
        return ("xor", options)
    raise TypeError(f"not a block: {block!r}")


def _product(dnfs: Sequence[list[frozenset]], cap: int) -> list[frozenset]:
    total = 1
    for d in dnfs:
        total *= len(d)
    if total > cap:
        raise CapExceeded(f"{total} alternatives exceed cap {cap}")
    return [frozenset().union(*combo) for combo in itertools.product(*dnfs)]


def _entry(t, cap: int) -> list[frozenset]:
    tag = t[0]
    if tag == "act":
        return [frozenset([t[1]])]
    if tag == "seq":
        return _entry(t[1][0], cap)
    if tag == "xor":
        return [alt for c in t[1] for alt in _entry(c, cap)]
    if tag == "and":
        return _product([_entry(c, cap) for c in t[1]], cap)
    return _entry(t[1], cap)


def _exits(t, cap: int) -> list[frozenset]:
    tag = t[0]
    if tag == "act":
        return [frozenset([t[1]])]
    if tag == "seq":
        return _exits(t[1][-1], cap)
    if tag == "xor":
        return [alt for c in t[1] for alt in _exits(c, cap)]
    if tag == "and":
        return _product([_exits(c, cap) for c in t[1]], cap)
    return _exits(t[1], cap)


def _min_len(t) -> int:
    tag = t[0]
    if tag == "act":
        return 1
    if tag in ("seq", "and"):
        return sum(_min_len(c) for c in t[1])
    if tag == "xor":
        return min(_min_len(c) for c in t[1])
    return _min_len(t[1])


def _dedup(alts: Iterable[frozenset]) -> list[frozenset]:
    seen: list[frozenset] = []
    for a in alts:
        if a not in seen:
            seen.append(a)
    return seen


class _Builder:
    """Emits (body nodes, head alternatives) links in continuation style.

    `nxt` is the list of alternatives that follow the block (an empty
    frozenset is the ``true`` alternative), or None when the block's exits
    are picked up by an enclosing and-join or end the process.
    """

    def __init__(self, cap: int) -> None:
        self.cap = cap
        self.links: list[tuple[tuple[int, ...], list[frozenset]]] = []
        self.min_after: dict[int, int] = {}
        # gates each node has passed so far; a nested loop's exit instance
        # must go through the inner gate before the outer one can use it
        self.passed: dict[int, int] = {}
        self.stages: dict[tuple[int, ...], tuple[int, ...]] = {}

    def link_all(self, bodies: list[frozenset], head: list[frozenset]) -> None:
        """Links from alternative exit sets of one block to the same head."""
        head = _dedup(head)
        for body in bodies:
            key = tuple(sorted(body))
            self.links.append((key, head))
            self.stages[key] = tuple(self.passed.get(n, 0) for n in key)
        if frozenset() in head:
            for n in {n for body in bodies for n in body}:
                self.passed[n] = self.passed.get(n, 0) + 1

    def build(self, t, nxt: list[frozenset] | None, tail: int) -> None:
        tag = t[0]
        if tag == "act":
            self.min_after[t[1]] = tail
            if nxt is not None:
                self.link_all([frozenset([t[1]])], nxt)
        elif tag == "seq":
            kids = t[1]
            for i, child in enumerate(kids[:-1]):
                rest = sum(_min_len(c) for c in kids[i + 1:])
                self.build(child, _entry(kids[i + 1], self.cap), tail + rest)
            self.build(kids[-1], nxt, tail)
        elif tag == "xor":
            for child in t[1]:
                self.build(child, nxt, tail)
        elif tag == "and":
            for child in t[1]:
                self.build(child, None, tail)
            if nxt is not None:
                self.link_all(_exits(t, self.cap), nxt)
        else:  # loop
            body = t[1]
            again = _entry(body, self.cap)
            proceed = nxt if nxt is not None else [frozenset()]
            self.build(body, _dedup(again + proceed), tail)


def compile_model(
    model: ProcessModel, alt_cap: int = DEFAULT_ALT_CAP
) -> AbductiveSpec:
    """Compile a validated model into an abductive specification."""
    problems = validate(model)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    nodes = _Nodes()
    tree = _expand(model.root, nodes, alt_cap)
    builder = _Builder(alt_cap)
    builder.build(tree, None, 0)
    obs = {name: model.obs(name) for name in set(nodes.activity.values())}

    ics = [_make_ics((), _entry(tree, alt_cap), nodes.activity, obs, alt_cap)[0]]
    for body, head in builder.links:
        ics.extend(_make_ics(body, head, nodes.activity, obs, alt_cap))
    return AbductiveSpec(
        ics=tuple(ics),
        node_activity=dict(nodes.activity),
        observability=obs,
        min_after=builder.min_after,
        stages=builder.stages,
    )


def _make_ics(
    body: tuple[int, ...],
    head: list[frozenset],
    activity: dict[int, str],
    obs: dict[str, Observability],
    cap: int,
) -> list[IntegrityConstraint]:
    body_vars = {n: f"T{i}" for i, n in enumerate(body)}
    # head variables are always fresh, even when a loop re-expects a body node
    head_nodes = sorted({n for alt in head for n in alt})
    head_vars = {n: f"T{i}" for i, n in enumerate(head_nodes, start=len(body))}

    conjunctions: list[Conjunction] = []
    for alt in head:
        choices = [
            [Literal(k, activity[n], head_vars[n], n) for k in _EPSILON[obs[activity[n]]]]
            for n in sorted(alt)
        ]
        for combo in itertools.product(*choices):
            atoms = tuple(
                TimeAtom(lit.time, body_vars[b])
                for lit in combo
                for b in body
            )
            conjunctions.append(Conjunction(tuple(combo), atoms))
            if len(conjunctions) > cap:
                raise CapExceeded(f"head exceeds {cap} alternatives")
    head_t = tuple(conjunctions)

    variants = itertools.product(
        *[[Literal(k, activity[n], body_vars[n], n) for k in _TAU[obs[activity[n]]]] for n in body]
    )
    return [IntegrityConstraint(tuple(b), head_t) for b in variants]


def dump(spec: AbductiveSpec) -> str:
    """One constraint per line, ``body -> alt | alt | ...``."""
    return "\n".join(str(ic) for ic in spec.ics) + "\n"
