"""Block-structured process models and bounded run enumeration.

A model is a finite tree of single-entry-single-exit blocks whose leaves
are activities. Every activity carries an observability annotation that
says whether its executions show up in an event log.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

__all__ = [
    "Activity",
    "And",
    "Block",
    "CapExceeded",
    "Loop",
    "ModelFormatError",
    "Observability",
    "Or",
    "ProcessModel",
    "Run",
    "Seq",
    "Xor",
    "accepts",
    "activities",
    "dump_model",
    "enumerate_runs",
    "interleavings",
    "model_from_dict",
    "model_to_dict",
    "parse_model",
    "validate",
]

DEFAULT_RUN_CAP = 1_000_000

Run = tuple  # tuple[str, ...], one activity name per step


class CapExceeded(RuntimeError):
    """A configured enumeration or search budget was exhausted."""


class Observability(enum.Enum):
    ALWAYS = "always"
    NEVER = "never"
    POSSIBLY = "possibly"

    @classmethod
    def parse(cls, value: str | Observability | None) -> Observability:
        if value is None:
            return cls.POSSIBLY
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class Activity:
    name: str


@dataclass(frozen=True)
class Seq:
    children: tuple[Block, ...]

    def __init__(self, *children: Block) -> None:
        object.__setattr__(self, "children", _flat_children(children))


@dataclass(frozen=True)
class Xor:
    children: tuple[Block, ...]

    def __init__(self, *children: Block) -> None:
        object.__setattr__(self, "children", _flat_children(children))


@dataclass(frozen=True)
class And:
    children: tuple[Block, ...]

    def __init__(self, *children: Block) -> None:
        object.__setattr__(self, "children", _flat_children(children))


@dataclass(frozen=True)
class Or:
    children: tuple[Block, ...]

    def __init__(self, *children: Block) -> None:
        object.__setattr__(self, "children", _flat_children(children))


@dataclass(frozen=True)
class Loop:
    """Do-while loop: the body runs one or more times."""

    body: Block


Block = Union[Activity, Seq, Xor, And, Or, Loop]


def _flat_children(children: Sequence) -> tuple:
    # Seq(a, b) and Seq([a, b]) are both accepted
    if len(children) == 1 and isinstance(children[0], (list, tuple)):
        return tuple(children[0])
    return tuple(children)


def activities(block: Block) -> list[str]:
    """Activity names in left-to-right leaf order (duplicates kept)."""
    if isinstance(block, Activity):
        return [block.name]
    if isinstance(block, Loop):
        return activities(block.body)
    return [name for child in block.children for name in activities(child)]


@dataclass(frozen=True)
class ProcessModel:
    root: Block
    observability: Mapping[str, Observability] = field(default_factory=dict)

    @classmethod
    def create(
        cls,
        root: Block,
        observability: Mapping[str, Observability | str] | None = None,
    ) -> ProcessModel:
        """Build a model, defaulting every unannotated activity to POSSIBLY."""
        given = {k: Observability.parse(v) for k, v in (observability or {}).items()}
        obs = {name: given.pop(name, Observability.POSSIBLY) for name in activities(root)}
        # unknown keys are kept so that validate() can report them
        obs.update(given)
        return cls(root, obs)

    @property
    def activity_names(self) -> list[str]:
        return activities(self.root)

    def obs(self, name: str) -> Observability:
        return self.observability.get(name, Observability.POSSIBLY)

    def with_observability(
        self, obs: Observability | Mapping[str, Observability]
    ) -> ProcessModel:
        """Copy of the model with all (or the given) annotations replaced."""
        if isinstance(obs, Observability):
            return ProcessModel(self.root, {name: obs for name in self.activity_names})
        merged = dict(self.observability)
        merged.update(obs)
        return ProcessModel(self.root, merged)


def validate(model: ProcessModel) -> list[str]:
    """Return every structural violation of the model; empty means ok."""
    problems: list[str] = []
    seen: set[str] = set()

    def walk(block: Block, path: str) -> None:
        if isinstance(block, Activity):
            if not isinstance(block.name, str) or not block.name:
                problems.append(f"{path}: activity name must be a non-empty string")
            elif block.name in seen:
                problems.append(f"{path}: duplicate activity name {block.name!r}")
            else:
                seen.add(block.name)
            return
        if isinstance(block, Loop):
            walk(block.body, f"{path}/loop")
            return
        if not isinstance(block, (Seq, Xor, And, Or)):
            problems.append(f"{path}: unknown block {type(block).__name__}")
            return
        kind = type(block).__name__.lower()
        if len(block.children) < 2:
            what = "children" if isinstance(block, Seq) else "branches"
            problems.append(
                f"{path}/{kind}: needs at least 2 {what}, got {len(block.children)}"
            )
        for i, child in enumerate(block.children):
            walk(child, f"{path}/{kind}[{i}]")

    walk(model.root, "")
    for name in sorted(seen - set(model.observability)):
        problems.append(f"activity {name!r} has no observability entry")
    for name in sorted(set(model.observability) - seen):
        problems.append(f"observability entry for unknown activity {name!r}")
    for name, obs in model.observability.items():
        if not isinstance(obs, Observability):
            problems.append(f"observability of {name!r} is not an Observability: {obs!r}")
    return problems


# -- run enumeration ---------------------------------------------------------

def min_length(block: Block) -> int:
    if isinstance(block, Activity):
        return 1
    if isinstance(block, Loop):
        return min_length(block.body)
    if isinstance(block, Seq) or isinstance(block, And):
        return sum(min_length(c) for c in block.children)
    return min(min_length(c) for c in block.children)


def max_single_length(block: Block) -> int:
    """Longest run length when every loop body executes exactly once."""
    if isinstance(block, Activity):
        return 1
    if isinstance(block, Loop):
        return max_single_length(block.body)
    if isinstance(block, Xor):
        return max(max_single_length(c) for c in block.children)
    return sum(max_single_length(c) for c in block.children)


def interleavings(seqs: Sequence[tuple]) -> Iterator[tuple]:
    """All shuffles of the given sequences preserving each one's order."""
    seqs = [s for s in seqs if s]
    if not seqs:
        yield ()
        return
    if len(seqs) == 1:
        yield tuple(seqs[0])
        return
    for i, s in enumerate(seqs):
        rest = seqs[:i] + [s[1:]] + seqs[i + 1:]
        for tail in interleavings(rest):
            yield (s[0],) + tail


class _Counter:
    def __init__(self, cap: int) -> None:
        self.cap = cap
        self.n = 0

    def tick(self, k: int = 1) -> None:
        self.n += k
        if self.n > self.cap:
            raise CapExceeded(f"run enumeration exceeded cap of {self.cap}")


def _runs(block: Block, budget: int, counter: _Counter) -> set[tuple]:
    """Every run of `block` with length <= budget."""
    if budget < min_length(block):
        return set()
    if isinstance(block, Activity):
        return {(block.name,)}
    if isinstance(block, Xor):
        out: set[tuple] = set()
        for child in block.children:
            out |= _runs(child, budget, counter)
        return out
    if isinstance(block, Seq):
        return _concat(list(block.children), budget, counter)
    if isinstance(block, And):
        return _shuffle(list(block.children), budget, counter)
    if isinstance(block, Or):
        out = set()
        for k in range(1, len(block.children) + 1):
            for subset in itertools.combinations(block.children, k):
                out |= _shuffle(list(subset), budget, counter)
        return out
    if isinstance(block, Loop):
        body_min = min_length(block.body)
        once = _runs(block.body, budget, counter)
        out = set(once)
        frontier = set(once)
        while frontier:
            grown = set()
            for prefix in frontier:
                room = budget - len(prefix)
                if room < body_min:
                    continue
                for step in once:
                    if len(step) <= room:
                        grown.add(prefix + step)
            frontier = grown - out
            out |= grown
            counter.tick(len(frontier))
        return out
    raise TypeError(f"not a block: {block!r}")


def _concat(children: list[Block], budget: int, counter: _Counter) -> set[tuple]:
    mins = [min_length(c) for c in children]
    partial: set[tuple] = {()}
    for i, child in enumerate(children):
        reserve = sum(mins[i + 1:])
        nxt: set[tuple] = set()
        for prefix in partial:
            for run in _runs(child, budget - reserve - len(prefix), counter):
                nxt.add(prefix + run)
        counter.tick(len(nxt))
        partial = nxt
    return partial


def _shuffle(children: list[Block], budget: int, counter: _Counter) -> set[tuple]:
    mins = [min_length(c) for c in children]
    out: set[tuple] = set()
    total_min = sum(mins)

    def pick(i: int, chosen: list[tuple], used: int) -> None:
        if i == len(children):
            for run in interleavings(chosen):
                out.add(run)
                counter.tick(1)
            return
        room = budget - used - (total_min - sum(mins[: i + 1]))
        for run in _runs(children[i], room, counter):
            pick(i + 1, chosen + [run], used + len(run))

    pick(0, [], 0)
    return out


def enumerate_runs(
    model: ProcessModel, max_len: int, cap: int = DEFAULT_RUN_CAP
) -> set[Run]:
    """All runs of the model whose length does not exceed max_len."""
    if max_len < 1:
        raise ValueError("max_len must be positive")
    problems = validate(model)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    return _runs(model.root, max_len, _Counter(cap))


def accepts(block: Block, run: Sequence[str]) -> bool:
    """Plain recursive acceptor: can `run` be produced by `block`?"""
    run = tuple(run)
    return _accepts(block, run)


def _accepts(block: Block, run: tuple) -> bool:
    if isinstance(block, Activity):
        return run == (block.name,)
    if isinstance(block, Xor):
        return any(_accepts(c, run) for c in block.children)
    if isinstance(block, Seq):
        first, rest = block.children[0], block.children[1:]
        tail = Seq(*rest) if len(rest) > 1 else rest[0]
        return any(
            _accepts(first, run[:k]) and _accepts(tail, run[k:])
            for k in range(1, len(run))
        )
    if isinstance(block, Loop):
        if _accepts(block.body, run):
            return True
        return any(
            _accepts(block.body, run[:k]) and _accepts(block, run[k:])
            for k in range(1, len(run))
        )
    if isinstance(block, (And, Or)):
        owners = [set(activities(c)) for c in block.children]
        parts: list[list[str]] = [[] for _ in block.children]
        for step in run:
            hits = [i for i, names in enumerate(owners) if step in names]
            if len(hits) != 1:
                return False
            parts[hits[0]].append(step)
        used = [i for i, p in enumerate(parts) if p]
        if isinstance(block, And) and len(used) != len(parts):
            return False
        if not used:
            return False
        return all(_accepts(block.children[i], tuple(parts[i])) for i in used)
    raise TypeError(f"not a block: {block!r}")


# -- JSON block-tree format ----------------------------------------------------

class ModelFormatError(ValueError):
    """The model file is not a well-formed block tree."""


_COMPOSITES = {"seq": Seq, "xor": Xor, "and": And, "or": Or}


def model_from_dict(data: Mapping) -> ProcessModel:
    """Read ``{"type": "seq", "children": [...]}`` style trees.

    Activities are ``{"type": "activity", "name": "AI", "obs": "possibly"}``;
    ``obs`` is optional and defaults to possibly.
    """
    obs: dict[str, Observability] = {}

    def block(node, path: str) -> Block:
        if not isinstance(node, Mapping):
            raise ModelFormatError(f"{path}: expected an object, got {type(node).__name__}")
        kind = node.get("type")
        if kind == "activity":
            name = node.get("name")
            if not isinstance(name, str) or not name:
                raise ModelFormatError(f"{path}: activity needs a non-empty 'name'")
            try:
                obs[name] = Observability.parse(node.get("obs"))
            except ValueError:
                raise ModelFormatError(f"{path}: bad observability {node.get('obs')!r}") from None
            return Activity(name)
        if kind == "loop":
            if "body" in node:
                return Loop(block(node["body"], f"{path}/loop"))
            kids = node.get("children")
            if isinstance(kids, list) and len(kids) == 1:
                return Loop(block(kids[0], f"{path}/loop"))
            raise ModelFormatError(f"{path}: loop needs a 'body'")
        if kind in _COMPOSITES:
            kids = node.get("children")
            if not isinstance(kids, list):
                raise ModelFormatError(f"{path}: {kind} needs a 'children' list")
            return _COMPOSITES[kind](
                [block(k, f"{path}/{kind}[{i}]") for i, k in enumerate(kids)]
            )
        raise ModelFormatError(f"{path}: unknown block type {kind!r}")

    return ProcessModel.create(block(data, ""), obs)


def model_to_dict(model: ProcessModel) -> dict:
    def block(b: Block) -> dict:
        if isinstance(b, Activity):
            return {"type": "activity", "name": b.name, "obs": model.obs(b.name).value}
        if isinstance(b, Loop):
            return {"type": "loop", "body": block(b.body)}
        kind = type(b).__name__.lower()
        return {"type": kind, "children": [block(c) for c in b.children]}

    return block(model.root)


def parse_model(text: str) -> ProcessModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return model_from_dict(data)


def dump_model(model: ProcessModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"
