"""Figures for benchmark tables, written as PNG files."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchRow  # noqa: E402

__all__ = ["plot_aoa", "plot_modes", "plot_solutions", "render_all"]


def _series(rows, key, x, y):
    groups: dict = {}
    for r in rows:
        groups.setdefault(key(r), []).append(r)
    for label, items in sorted(groups.items()):
        items.sort(key=x)
        yield label, [x(r) for r in items], [y(r) for r in items]


def plot_aoa(rows: Sequence[BenchRow], path: Path) -> Path:
    """Median all-solutions time against %AOA, one line per (#OE, TML)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    chosen = [r for r in rows if r.mode == "all"]
    for (k, tml), xs, ys in _series(
        chosen, lambda r: (r.num_observed, r.tml), lambda r: r.pct_aoa, lambda r: r.median_elapsed
    ):
        ax.plot(xs, ys, marker="o", label=f"#OE={k}, TML={tml}")
    ax.set_xlabel("% activities with certain observability")
    ax.set_ylabel("median elapsed (s), all solutions")
    ax.set_yscale("log")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_solutions(rows: Sequence[BenchRow], path: Path) -> Path:
    """Number of completions against TML, one line per (%AOA, #OE)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    chosen = [r for r in rows if r.mode == "all"]
    for (pct, k), xs, ys in _series(
        chosen, lambda r: (r.pct_aoa, r.num_observed), lambda r: r.tml, lambda r: r.solutions
    ):
        ax.plot(xs, ys, marker="s", label=f"%AOA={pct}, #OE={k}")
    ax.set_xlabel("trace max length (TML)")
    ax.set_ylabel("#sol")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_modes(rows: Sequence[BenchRow], path: Path) -> Path:
    """First-solution against all-solutions time for the same inputs."""
    first = {(r.pct_aoa, r.num_observed, r.tml): r.elapsed for r in rows if r.mode == "first"}
    pairs = [
        (first[(r.pct_aoa, r.num_observed, r.tml)], r.elapsed)
        for r in rows
        if r.mode == "all" and (r.pct_aoa, r.num_observed, r.tml) in first
    ]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    if pairs:
        xs, ys = zip(*pairs)
        ax.scatter(xs, ys, s=14)
        lo, hi = min(xs + ys), max(xs + ys)
        ax.plot([lo, hi], [lo, hi], color="grey", linewidth=0.8, linestyle="--")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("first solution (s)")
    ax.set_ylabel("all solutions (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_all(rows: Sequence[BenchRow], out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        plot_aoa(rows, out_dir / "elapsed_vs_aoa.png"),
        plot_solutions(rows, out_dir / "solutions_vs_tml.png"),
        plot_modes(rows, out_dir / "all_vs_first.png"),
    ]
