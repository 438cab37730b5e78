"""Random time stores and an exhaustive reference for them."""

from __future__ import annotations

import random

import numpy as np

from abducta.solver import TimeAtom, TimeStore


def random_store(rng: random.Random):
    k = rng.randint(1, 6)
    names = [f"T{i}" for i in range(k)]
    atoms = []
    for _ in range(rng.randint(0, 2 * k)):
        roll = rng.random()
        if roll < 0.6 and k > 1:
            a, b = rng.sample(names, 2)
            atoms.append(TimeAtom(a, b, strict=rng.random() < 0.7))
        elif roll < 0.8:
            atoms.append(TimeAtom(rng.choice(names), rng.randint(0, 4)))
        else:
            atoms.append(TimeAtom(rng.randint(0, 7), rng.choice(names)))
    bindings = {n: rng.randint(0, 5) for n in names if rng.random() < 0.2}
    return names, atoms, bindings


def brute_force(names, atoms, bindings):
    """Exhaustive check over all assignments up to the stated bound.

    Returns None when unsatisfiable, else per-variable (min, max) over all
    solutions. Enumerates in numpy slices, one per value of the first
    variable.
    """
    consts = [t for a in atoms for t in (a.left, a.right) if isinstance(t, int)]
    consts += list(bindings.values())
    bound = max(consts, default=0) + len(names) + 1
    domains = [
        np.array([bindings[n]]) if n in bindings else np.arange(bound + 1) for n in names
    ]
    lo = {n: None for n in names}
    hi = {n: None for n in names}
    for first in domains[0]:
        grids = np.meshgrid(np.array([first]), *domains[1:], indexing="ij")
        cols = {n: g.ravel() for n, g in zip(names, grids)}
        mask = np.ones(cols[names[0]].shape, dtype=bool)
        for a in atoms:
            left = cols[a.left] if not isinstance(a.left, int) else a.left
            right = cols[a.right] if not isinstance(a.right, int) else a.right
            mask &= (left > right) if a.strict else (left >= right)
        if not mask.any():
            continue
        for n in names:
            vals = cols[n][mask]
            lo[n] = int(vals.min()) if lo[n] is None else min(lo[n], int(vals.min()))
            hi[n] = int(vals.max()) if hi[n] is None else max(hi[n], int(vals.max()))
    if lo[names[0]] is None:
        return None
    return lo, hi


def build(names, atoms, bindings, order=None):
    s = TimeStore()
    for n in names:
        s.add_var(n)
    items = [("b", n, v) for n, v in bindings.items()] + [("a", a) for a in atoms]
    if order is not None:
        items = [items[i] for i in order]
    for item in items:
        if item[0] == "b":
            s.bind(item[1], item[2])
        else:
            s.add(item[1])
    return s
