"""One PNG per report type.

Every renderer takes the data object plus an output path, draws a
single self-contained figure, and closes it.  The Agg backend is
forced so rendering works headless, and savefig strips volatile
metadata so identical inputs produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np
import matplotlib.pyplot as plt

_SAVE = dict(dpi=110, metadata={"Software": "kolmo"})


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def order_figure(segment, path: str) -> None:
    """Scatter of object value against its budgeted complexity."""
    xs = [x for x, _ in segment.entries]
    ks = [k for _, k in segment.entries]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.scatter(xs, ks, s=8, alpha=0.6, edgecolors="none")
    ax.set_xscale("symlog")
    ax.set_xlabel("object x")
    ax.set_ylabel("shortest-witness index complexity")
    ax.set_title(f"order segment, m <= {segment.m_max}, budget {segment.step_budget}")
    _finish(fig, path)


def census_figure(report, path: str) -> None:
    """Objects-below-threshold counts against the pigeonhole line."""
    ts = [t for t, _ in report.thresholds]
    cs = [c for _, c in report.thresholds]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.step(ts, cs, where="post", label="objects with k_value <= T")
    ax.plot(ts, ts, linestyle="--", color="gray", label="pigeonhole bound T")
    ax.set_xscale("log", base=2)
    ax.set_yscale("symlog")
    ax.set_xlabel("threshold T")
    ax.set_ylabel("count")
    ax.legend()
    ax.set_title(f"census over {report.n_bits}-bit program space")
    _finish(fig, path)


def apriori_figure(table, path: str, candidates=()) -> None:
    """Mass profile over the support, round-number candidates marked."""
    xs = np.array(table.support())
    masses = np.array([float(table.mass(int(x))) for x in xs])
    pos = xs > 0
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.scatter(xs[pos], masses[pos], s=6, alpha=0.5, edgecolors="none")
    for c in candidates:
        m = float(table.mass(c))
        if m > 0:
            ax.scatter([c], [m], marker="*", s=140, color="crimson", zorder=3)
            ax.annotate(str(c), (c, m), textcoords="offset points", xytext=(4, 4))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("integer n")
    ax.set_ylabel("a priori mass")
    ax.set_title(f"semimeasure, L={table.max_bits}, T={table.budget}")
    _finish(fig, path)


def nbody_figure(traj, path: str) -> None:
    """Orbit traces in the xy-plane beside the energy error history."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.5))
    n = traj.q.shape[1]
    for i in range(n):
        ax1.plot(traj.q[:, i, 0], traj.q[:, i, 1], lw=0.8, label=f"body {i}")
    ax1.set_xlabel("x")
    ax1.set_ylabel("y")
    ax1.set_aspect("equal", adjustable="datalim")
    ax1.legend(fontsize=8)
    ax1.set_title(f"{traj.method}, dt={traj.dt:g}" + (" [aborted]" if traj.aborted else ""))
    e0 = traj.E[0]
    scale = abs(e0) if e0 else 1.0
    ax2.plot(traj.times, np.abs(traj.E - e0) / scale, lw=0.8)
    ax2.set_yscale("log")
    ax2.set_xlabel("t")
    ax2.set_ylabel("|E - E0| / |E0|")
    ax2.set_title("energy error")
    _finish(fig, path)


def divergence_figure(report, path: str) -> None:
    """Twin-separation growth on a log scale."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(report.times, report.distances, lw=0.9)
    ax.axhline(report.delta, linestyle=":", color="gray", label=f"delta = {report.delta:g}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("phase-space separation")
    ax.legend()
    ax.set_title(f"twin divergence, slope {report.log_slope:.3f}/unit time")
    _finish(fig, path)


def spurious_figure(result, path: str) -> None:
    """P-value histogram with the nominal and corrected cutoffs."""
    p = result.p_values[np.isfinite(result.p_values)].ravel()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(p, bins=40, range=(0.0, 1.0), edgecolor="black", linewidth=0.3)
    ax.axvline(result.alpha, color="crimson", linestyle="--",
               label=f"alpha = {result.alpha:g} ({result.nominal_count} nominal)")
    ax.axvline(result.bonferroni_alpha, color="purple", linestyle=":",
               label=f"alpha/{result.n_tests} ({result.bonferroni_count} corrected)")
    ax.set_xlabel("p-value")
    ax.set_ylabel("tests")
    ax.legend()
    ax.set_title(f"{result.n_tests} null tests, seed {result.seed}, test {result.test}")
    _finish(fig, path)


def compare_figure(freq, table, path: str) -> None:
    """Rank-vs-rank scatter over the shared support."""
    from scipy import stats

    shared = sorted(
        x for x, c in freq.counts.items() if c > 0 and table.units.get(x, 0) > 0
    )
    f = stats.rankdata([freq.counts[x] for x in shared])
    m = stats.rankdata([table.units[x] for x in shared])
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.scatter(f, m, s=10, alpha=0.6, edgecolors="none")
    ax.set_xlabel("corpus frequency rank")
    ax.set_ylabel("a priori mass rank")
    ax.set_title(f"rank agreement over {len(shared)} shared integers")
    _finish(fig, path)
