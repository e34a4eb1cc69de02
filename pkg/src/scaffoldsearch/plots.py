"""Report figures. Rendered off-screen straight to image files."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluate import FCurve, LENGTH_BUCKETS  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_curves(curves: Mapping[str, FCurve], path) -> Path:
    """Success rate against budget, one line per algorithm, log-scaled budget axis."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, curve in curves.items():
            ax.step(curve.budgets, curve.fractions, where="post", label=name)
        ax.set_xscale("log")
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("budget B")
        ax.set_ylabel("fraction solved")
        if curves:
            ax.legend(frameon=False)
        return _save(fig, path)


def plot_leads(leads: Mapping[str, Mapping[int, float]], path) -> Path:
    """Lead of each algorithm pair as a function of budget; infinite leads are left out."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, series in leads.items():
            xs = [b for b, v in sorted(series.items()) if v != float("inf")]
            ax.plot(xs, [series[b] for b in xs], marker=".", label=name)
        ax.set_xscale("log")
        ax.set_xlabel("budget B")
        ax.set_ylabel("extra budget needed")
        if leads:
            ax.legend(frameon=False)
        return _save(fig, path)


def plot_divergence(buckets: Mapping[str, float], path) -> Path:
    """Share of divergences in the first half, per program-length bucket."""
    labels = [f"({lo}, {'inf' if hi is None else hi}]" for lo, hi in LENGTH_BUCKETS]
    values = [buckets.get(label, 0.0) for label in labels]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.bar(range(len(labels)), values, color="0.45")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels)
        ax.set_ylim(0, 1)
        ax.set_xlabel("program length L")
        ax.set_ylabel("first-half divergences")
        return _save(fig, path)
