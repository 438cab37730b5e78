"""Brute-force reference semantics for small instances.

Works directly on the block tree, independent of the constraint compiler,
the engine and the time store:

* every derivation of the model up to ``max_len`` steps is enumerated
  together with its causal order (sequence and loop iterations order their
  parts strictly, parallel branches are unordered);
* every injective assignment of trace events to run positions is tried
  (always-observable positions must receive an event, never-observable ones
  must not, unmatched positions are hypotheses);
* concrete timestamps up to ``time_bound`` are enumerated: causal pairs must
  be strictly increasing, consecutive positions non-decreasing, matched
  ground events keep their timestamp.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .conformance import VerdictKind
from .engine import Explanation
from .ic import Kind
from .log import Trace
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
)

__all__ = ["OracleResult", "brute_force", "derivations", "recheck"]

DEFAULT_ACTIVITY_CAP = 10

Derivation = tuple  # (steps: tuple[str, ...], before: frozenset[tuple[int, int]])


@dataclass
class OracleResult:
    kind: VerdictKind
    witnesses: set[tuple]  # (run, event id or None per position)


def _least(block: Block) -> int:
    if isinstance(block, Activity):
        return 1
    if isinstance(block, Loop):
        return _least(block.body)
    sizes = [_least(c) for c in block.children]
    return min(sizes) if isinstance(block, (Xor, Or)) else sum(sizes)


def _chain(
    left: list[Derivation], right: list[Derivation], budget: int, keep=None
) -> list[Derivation]:
    out = []
    for ls, lb in left:
        for rs, rb in right:
            if len(ls) + len(rs) > budget or (keep is not None and not keep(ls + rs)):
                continue
            k = len(ls)
            before = set(lb)
            before.update((i + k, j + k) for i, j in rb)
            before.update((i, j) for i in range(k) for j in range(k, k + len(rs)))
            out.append((ls + rs, frozenset(before)))
    return out


def _parallel(parts: list[Derivation]) -> list[Derivation]:
    labelled = [[(p, k) for k in range(len(steps))] for p, (steps, _) in enumerate(parts)]
    total = sum(len(x) for x in labelled)
    out = []

    def shuffle(queues, acc):
        if len(acc) == total:
            where = {label: pos for pos, label in enumerate(acc)}
            steps = tuple(parts[p][0][k] for p, k in acc)
            before = frozenset(
                (where[(p, i)], where[(p, j)])
                for p, (_, b) in enumerate(parts)
                for i, j in b
            )
            out.append((steps, before))
            return
        for q, queue in enumerate(queues):
            if queue:
                shuffle(queues[:q] + [queue[1:]] + queues[q + 1:], acc + [queue[0]])

    shuffle(labelled, [])
    return out


def derivations(block: Block, budget: int, keep=None) -> list[Derivation]:
    """Every derivation of `block` with at most `budget` steps.

    `keep`, if given, is a predicate on step tuples that must hold for every
    part of an acceptable derivation whenever it holds for the whole
    (for instance an upper bound on how often an activity occurs). It is
    applied to partial results to cut the enumeration early.
    """
    if budget < _least(block):
        return []
    if isinstance(block, Activity):
        steps = (block.name,)
        return [(steps, frozenset())] if keep is None or keep(steps) else []
    if isinstance(block, Xor):
        return [d for c in block.children for d in derivations(c, budget, keep)]
    if isinstance(block, Seq):
        kids = list(block.children)
        acc = derivations(kids[0], budget - sum(_least(c) for c in kids[1:]), keep)
        for i, child in enumerate(kids[1:], start=1):
            reserve = sum(_least(c) for c in kids[i + 1:])
            acc = _chain(acc, derivations(child, budget - reserve, keep), budget - reserve, keep)
        return acc
    if isinstance(block, (And, Or)):
        if isinstance(block, And):
            groups = [block.children]
        else:
            groups = [
                s for k in range(1, len(block.children) + 1)
                for s in itertools.combinations(block.children, k)
            ]
        out = []
        for group in groups:
            options = [derivations(c, budget, keep) for c in group]
            for combo in itertools.product(*options):
                if sum(len(s) for s, _ in combo) > budget:
                    continue
                if keep is not None and not keep(tuple(a for s, _ in combo for a in s)):
                    continue
                out.extend(_parallel(list(combo)))
        return out
    if isinstance(block, Loop):
        once = derivations(block.body, budget, keep)
        out = list(once)
        frontier = once
        while frontier:
            frontier = _chain(frontier, once, budget, keep)
            out.extend(frontier)
        return out
    raise TypeError(f"not a block: {block!r}")


def _timeable(n: int, before: frozenset, fixed: dict[int, int], bound: int) -> bool:
    preds = [[i for i, j in before if j == p] for p in range(n)]
    # the next fixed value at or after each position caps what can be chosen
    cap_after = [bound] * (n + 1)
    for p in range(n - 1, -1, -1):
        cap_after[p] = min(cap_after[p + 1], fixed.get(p, bound))
    values = [0] * n

    def assign(p: int, floor: int) -> bool:
        if p == n:
            return True
        candidates = [fixed[p]] if p in fixed else range(floor, cap_after[p] + 1)
        for t in candidates:
            if t < floor or t > cap_after[p]:
                continue
            if any(values[i] >= t for i in preds[p]):
                continue
            values[p] = t
            if assign(p + 1, t):
                return True
        return False

    return assign(0, 0)


def brute_force(
    model: ProcessModel,
    trace: Trace,
    max_len: int,
    time_bound: int | None = None,
    activity_cap: int = DEFAULT_ACTIVITY_CAP,
) -> OracleResult:
    """Classify the trace by exhaustive enumeration."""
    names = model.activity_names
    if len(names) > activity_cap:
        raise CapExceeded(f"{len(names)} activities exceed oracle cap {activity_cap}")
    events = list(trace.events)
    if time_bound is None:
        ground = [e.timestamp for e in events if e.timestamp is not None]
        time_bound = max(ground, default=0) + max_len + 1

    # an always-observable step needs its own event, so no derivation can
    # contain more of them than the trace has compatible events
    room = {
        a: sum(1 for e in events if e.activity in (None, a))
        for a in names
        if model.obs(a) is Observability.ALWAYS
    }
    total = len(events)

    def keep(steps: tuple) -> bool:
        used = 0
        for a, limit in room.items():
            k = steps.count(a)
            if k > limit:
                return False
            used += k
        return used <= total

    witnesses: set[tuple] = set()
    for steps, before in set(derivations(model.root, max_len, keep)):
        n = len(steps)
        if n < len(events):
            continue
        obs = [model.obs(a) for a in steps]
        slots: list[str | None] = [None] * n

        def match(k: int) -> None:
            if k == len(events):
                if any(o is Observability.ALWAYS and s is None for o, s in zip(obs, slots)):
                    return
                key = (steps, tuple(slots))
                if key in witnesses:
                    return
                fixed = {
                    p: trace.event(s).timestamp
                    for p, s in enumerate(slots)
                    if s is not None and trace.event(s).timestamp is not None
                }
                if _timeable(n, before, fixed, time_bound):
                    witnesses.add(key)
                return
            ev = events[k]
            for p in range(n):
                if slots[p] is not None or obs[p] is Observability.NEVER:
                    continue
                if ev.activity is not None and ev.activity != steps[p]:
                    continue
                slots[p] = ev.id
                match(k + 1)
                slots[p] = None

        match(0)

    if not witnesses:
        kind = VerdictKind.NON_COMPLIANT
    elif any(all(s is not None for s in slots) for _, slots in witnesses):
        kind = VerdictKind.STRONG
    else:
        kind = VerdictKind.CONDITIONAL
    return OracleResult(kind, witnesses)


def recheck(
    model: ProcessModel, trace: Trace, expl: Explanation, max_len: int
) -> list[str]:
    """Independent soundness check of one engine explanation.

    Returns the problems found (empty when the explanation is sound):
    the least witness must satisfy every stored atom by substitution,
    every trace event must be matched exactly once to a position of the
    same activity and timestamp, observability must be respected, and the
    run must be a derivation of the model whose causal order the witness
    timestamps respect.
    """
    problems: list[str] = []
    run = expl.run
    if len(run) > max_len:
        problems.append(f"run of length {len(run)} exceeds max_len {max_len}")
    try:
        witness = expl.witness()
    except Exception as exc:  # an unsatisfiable store is itself a finding
        return problems + [f"store has no solution: {exc}"]
    values = {f"T{i}": v for i, v in witness.items()}
    for atom in expl.store.atoms:
        if not atom.holds(values):
            problems.append(f"atom {atom} violated by witness")
    for var, value in expl.store.bindings.items():
        if values.get(var) != value:
            problems.append(f"binding {var}={value} violated by witness")
    if any(v < 0 for v in witness.values()):
        problems.append("negative timestamp in witness")

    used: dict[str, int] = {}
    for i, pos in enumerate(expl.positions):
        obs = model.obs(pos.activity)
        if pos.event is None:
            if pos.kind is not Kind.ABDUCED:
                problems.append(f"position {i} is expected but unmatched")
            if obs is Observability.ALWAYS:
                problems.append(f"always-observable {pos.activity} abduced at {i}")
            continue
        if obs is Observability.NEVER:
            problems.append(f"never-observable {pos.activity} matched at {i}")
        if pos.event in used:
            problems.append(f"event {pos.event} matched twice")
        used[pos.event] = i
        ev = trace.event(pos.event)
        if ev.activity is not None and ev.activity != pos.activity:
            problems.append(f"event {ev.id} is {ev.activity}, position {i} is {pos.activity}")
        if ev.timestamp is not None and ev.timestamp != witness[i]:
            problems.append(f"event {ev.id} at {ev.timestamp}, witness puts it at {witness[i]}")
    for ev in trace.events:
        if ev.id not in used:
            problems.append(f"event {ev.id} not matched")

    for i in range(len(run) - 1):
        if witness[i] > witness[i + 1]:
            problems.append(f"positions {i} and {i + 1} out of time order")
    fitting = [
        before
        for steps, before in derivations(model.root, len(run))
        if steps == run
    ]
    if not fitting:
        problems.append(f"run {run} is not a run of the model")
    elif not any(all(witness[a] < witness[b] for a, b in before) for before in fitting):
        problems.append("witness breaks the causal order of every derivation of the run")
    return problems
