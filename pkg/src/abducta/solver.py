"""Incremental difference-constraint store over natural-number time points.

Every constraint is normalised to ``x >= y + w`` (an edge y -> x of weight
w). A strict ``x > y`` has w = 1, non-strict ``x >= y`` has w = 0. Ground
values enter as per-variable lower/upper bounds. All variables are >= 0.

The store keeps the least solution (longest-path lower bounds) up to date.
Adding an edge can only create a positive cycle through that edge, so the
forward propagation from its head is also the cycle check. An upper bound
is violated iff the least solution violates it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Union

__all__ = ["Inconsistent", "TimeAtom", "TimeStore", "Term"]

Term = Union[Hashable, int]


class Inconsistent(Exception):
    """The asserted constraints have no solution over the naturals."""


@dataclass(frozen=True)
class TimeAtom:
    """``left > right`` (or ``left >= right`` when strict is False).

    Terms are variable names (any hashable that is not an int) or naturals.
    """

    left: Term
    right: Term
    strict: bool = True

    def __str__(self) -> str:
        op = ">" if self.strict else ">="
        return f"{self.left}{op}{self.right}"

    def holds(self, values: Mapping) -> bool:
        lv = self.left if _is_const(self.left) else values[self.left]
        rv = self.right if _is_const(self.right) else values[self.right]
        return lv > rv if self.strict else lv >= rv

    def rename(self, mapping: Mapping) -> TimeAtom:
        def r(t):
            return t if _is_const(t) else mapping.get(t, t)
        return TimeAtom(r(self.left), r(self.right), self.strict)


def _is_const(term) -> bool:
    return isinstance(term, int) and not isinstance(term, bool)


class TimeStore:
    __slots__ = ("lb", "ub", "succ", "atoms", "bindings", "consistent")

    def __init__(self) -> None:
        self.lb: dict = {}
        self.ub: dict = {}
        self.succ: dict = {}
        self.atoms: list[TimeAtom] = []
        self.bindings: dict = {}
        self.consistent = True

    # -- construction ------------------------------------------------------

    def copy(self) -> TimeStore:
        other = TimeStore.__new__(TimeStore)
        other.lb = dict(self.lb)
        other.ub = dict(self.ub)
        other.succ = {k: list(v) for k, v in self.succ.items()}
        other.atoms = list(self.atoms)
        other.bindings = dict(self.bindings)
        other.consistent = self.consistent
        return other

    @classmethod
    def of(cls, atoms: Iterable[TimeAtom] = (), bindings: Mapping | None = None) -> TimeStore:
        store = cls()
        for var, value in (bindings or {}).items():
            store.bind(var, value)
        for atom in atoms:
            store.add(atom)
        return store

    def variables(self) -> list:
        return list(self.lb)

    def add_var(self, var) -> None:
        if var not in self.lb:
            self.lb[var] = 0
            self.succ[var] = []

    # -- assertions; each returns the consistency verdict -------------------

    def add(self, atom: TimeAtom) -> bool:
        if not self.consistent:
            return False
        self.atoms.append(atom)
        w = 1 if atom.strict else 0
        left, right = atom.left, atom.right
        lc, rc = _is_const(left), _is_const(right)
        if lc and rc:
            ok = left > right if atom.strict else left >= right
            if not ok:
                self.consistent = False
            return ok
        if rc:
            return self._raise_lb(left, right + w)
        if lc:
            return self._lower_ub(right, left - w)
        return self._edge(right, left, w)

    def bind(self, var, value: int) -> bool:
        if not self.consistent:
            return False
        if value < 0:
            self.consistent = False
            return False
        self.bindings[var] = value
        return self._raise_lb(var, value) and self._lower_ub(var, value)

    def gt(self, left, right) -> bool:
        return self.add(TimeAtom(left, right, True))

    def ge(self, left, right) -> bool:
        return self.add(TimeAtom(left, right, False))

    def _lower_ub(self, var, value: int) -> bool:
        self.add_var(var)
        if value < self.ub.get(var, value + 1):
            self.ub[var] = value
        if self.lb[var] > self.ub[var]:
            self.consistent = False
        return self.consistent

    def _raise_lb(self, var, value: int) -> bool:
        self.add_var(var)
        if value <= self.lb[var]:
            return True
        self.lb[var] = value
        return self._propagate(var, origin=None)

    def _edge(self, src, dst, w: int) -> bool:
        self.add_var(src)
        self.add_var(dst)
        if src == dst:
            if w > 0:
                self.consistent = False
            return self.consistent
        self.succ[src].append((dst, w))
        if self.lb[src] + w <= self.lb[dst]:
            return True
        self.lb[dst] = self.lb[src] + w
        return self._propagate(dst, origin=src)

    def _propagate(self, start, origin) -> bool:
        lb, ub, succ = self.lb, self.ub, self.succ
        if start in ub and lb[start] > ub[start]:
            self.consistent = False
            return False
        queue = deque([start])
        while queue:
            x = queue.popleft()
            base = lb[x]
            for y, w in succ[x]:
                if base + w > lb[y]:
                    if y == origin:
                        # positive cycle through the new edge
                        self.consistent = False
                        return False
                    lb[y] = base + w
                    if y in ub and lb[y] > ub[y]:
                        self.consistent = False
                        return False
                    queue.append(y)
        return True

    # -- queries -----------------------------------------------------------

    def lower(self, var) -> int:
        return self.lb.get(var, 0)

    def upper(self, var) -> int | None:
        """Greatest feasible value of var, or None when unbounded."""
        if not self.consistent:
            raise Inconsistent()
        hi = {v: self.ub.get(v) for v in self.lb}
        changed = True
        rounds = 0
        while changed and rounds <= len(hi):
            changed = False
            rounds += 1
            for x, edges in self.succ.items():
                for y, w in edges:
                    if hi[y] is not None and (hi[x] is None or hi[y] - w < hi[x]):
                        hi[x] = hi[y] - w
                        changed = True
        return hi.get(var)

    def solve(self) -> dict:
        """The least solution: every variable at its smallest feasible value."""
        if not self.consistent:
            raise Inconsistent()
        return dict(self.lb)

    def satisfied_by(self, values: Mapping) -> bool:
        if any(values[v] < 0 for v in self.lb):
            return False
        if any(values[v] != c for v, c in self.bindings.items()):
            return False
        return all(atom.holds(values) for atom in self.atoms)

    def renamed(self, mapping: Mapping) -> TimeStore:
        """Rebuild the store with variables renamed through mapping."""
        out = TimeStore()
        for var in self.lb:
            out.add_var(mapping.get(var, var))
        for var, value in self.bindings.items():
            out.bind(mapping.get(var, var), value)
        for atom in self.atoms:
            out.add(atom.rename(mapping))
        return out
