"""Static figures written next to the CSV/JSON outputs (Agg backend, PNG)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (4.5, 3.2),
    "savefig.dpi": 150,
}
# Without this the PNG carries the matplotlib version and reruns would not be comparable
# across installs.
_META = {"Software": None}


def _save(fig, path: str | os.PathLike) -> None:
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def degree_distribution(k, empirical, theoretical, path, title: str | None = None) -> None:
    """Log-log empirical pmf (markers) over the power-law pmf (line)."""
    k = np.asarray(k)
    emp = np.asarray(empirical, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        mask = emp > 0
        ax.loglog(k[mask], emp[mask], "o", ms=3, label="empirical")
        ax.loglog(k, theoretical, "-", lw=1, label="power law")
        ax.set_xlabel("degree k")
        ax.set_ylabel("p(k)")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def cluster_sizes(core_ids, sizes, path, title: str | None = None) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = np.arange(len(sizes))
        ax.bar(x, sizes, width=0.8)
        if len(core_ids) <= 30:
            ax.set_xticks(x, [str(c) for c in core_ids], rotation=90)
        ax.set_xlabel("core node")
        ax.set_ylabel("cluster size")
        if title:
            ax.set_title(title)
        _save(fig, path)


def distance_curve(iterations, distances, path, n_nodes: int | None = None) -> None:
    """Trace distance against the iteration budget (as a multiple of N when known)."""
    x = np.asarray(iterations, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if n_nodes:
            x = x / n_nodes
            ax.set_xlabel("iterations / N")
        else:
            ax.set_xlabel("iterations")
        ax.plot(x, distances, "o-", ms=3, lw=1)
        ax.set_ylabel("trace distance")
        _save(fig, path)


def seed_sweep(seeds, values, path, ylabel: str) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(seeds, values, "o", ms=4)
        med = float(np.median(values))
        ax.axhline(med, lw=0.8, ls="--", color="0.4", label=f"median {med:.3f}")
        ax.set_xlabel("seed")
        ax.set_ylabel(ylabel)
        ax.legend(frameon=False)
        _save(fig, path)
