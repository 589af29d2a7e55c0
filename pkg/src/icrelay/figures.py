"""Matplotlib figure rendering for CLI reports.

Figures are written to files next to the delimited output; nothing here is
interactive.  All functions take the already-computed data structures so
plotting stays out of the numerical paths.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .region import DofRegion


def save_region_figure(regions: dict, path: str, title: str = ""):
    """Draw one or more DoF regions as filled polygons.

    ``regions`` maps a label to a :class:`DofRegion`; vertices are already
    in counterclockwise order.
    """
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    for label, region in regions.items():
        pts = [(float(x), float(y)) for (x, y) in region.vertices]
        if len(pts) >= 3:
            xs, ys = zip(*(pts + [pts[0]]))
            ax.fill(xs, ys, alpha=0.25)
            ax.plot(xs, ys, label=label)
        else:
            xs, ys = zip(*pts) if pts else ((), ())
            ax.plot(xs, ys, "o-", label=label)
    ax.set_xlabel("d1 (streams/use)")
    ax.set_ylabel("d2 (streams/use)")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_slope_figure(rows, fit_slope: float, path: str, title: str = ""):
    """Scatter sum rate against SNR with the fitted DoF slope line."""
    rows = list(rows)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    snr = np.array([r[0] for r in rows])
    total = np.array([r[2] + r[3] for r in rows])
    ax.plot(snr, total, ".", alpha=0.4, label="trials")
    grid = np.unique(snr)
    means = np.array([total[snr == s].mean() for s in grid])
    ax.plot(grid, means, "o-", label="mean")
    # slope is per log2(P); convert the dB axis for the guide line
    anchor = means[-1]
    guide = anchor + fit_slope * (grid - grid[-1]) / (10.0 * np.log10(2.0))
    ax.plot(grid, guide, "--", label=f"slope {fit_slope:.2f}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("sum rate (bits/use)")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_allocation_figure(m: int, relay_total: int, values, best, path: str):
    """Sum DoF against the receive-side antenna count of the relay split."""
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    ns = [n for (n, _, _) in values]
    vs = [float(v) for (_, __, v) in values]
    ax.plot(ns, vs, "o-")
    ax.axhline(float(best), linestyle="--", alpha=0.5)
    ax.set_xlabel("relay receive antennas n (l = total - n)")
    ax.set_ylabel("sum DoF")
    ax.set_title(f"m={m}, relay antennas={relay_total}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(rows, path: str, title: str = ""):
    """Heat map of the linear sum DoF over the (n, l) grid, one panel per m."""
    ms = sorted({r["m"] for r in rows})
    fig, axes = plt.subplots(1, len(ms), figsize=(3.4 * len(ms), 3.2),
                             squeeze=False)
    for ax, m in zip(axes[0], ms):
        sub = [r for r in rows if r["m"] == m]
        ns = sorted({r["n"] for r in sub})
        ls = sorted({r["l"] for r in sub})
        grid = np.full((len(ns), len(ls)), np.nan)
        for r in sub:
            grid[ns.index(r["n"]), ls.index(r["l"])] = float(r["sum_bound"])
        im = ax.imshow(grid, origin="lower", aspect="auto",
                       extent=(min(ls) - 0.5, max(ls) + 0.5,
                               min(ns) - 0.5, max(ns) + 0.5))
        ax.set_xlabel("l")
        ax.set_ylabel("n")
        ax.set_title(f"m={m}")
        fig.colorbar(im, ax=ax, shrink=0.85)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
