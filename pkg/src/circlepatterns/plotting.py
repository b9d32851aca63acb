"""Matplotlib figures: circle patterns and convergence plots."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection, PatchCollection  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402


def render_pattern(cp, path, circles: bool = True, kites: bool = True,
                   title: str | None = None) -> None:
    """Draw circles and kite edges of a pattern to ``path`` (format by suffix)."""
    bq = cp.bq
    fig, ax = plt.subplots(figsize=(6, 6))
    if circles:
        patches = [Circle((cp.pos[z].real, cp.pos[z].imag), cp.radii[z])
                   for z in bq.white]
        ax.add_collection(PatchCollection(patches, facecolor="none",
                                          edgecolor="tab:blue", linewidth=0.4))
    if kites:
        e = bq.edges
        seg = np.stack([np.column_stack([cp.pos[e[:, 0]].real, cp.pos[e[:, 0]].imag]),
                        np.column_stack([cp.pos[e[:, 1]].real, cp.pos[e[:, 1]].imag])],
                       axis=1)
        ax.add_collection(LineCollection(seg, colors="0.3", linewidths=0.3))
    pts = cp.pos
    r = np.nanmax(cp.radii) if circles else 0.0
    ax.set_xlim(np.nanmin(pts.real) - r, np.nanmax(pts.real) + r)
    ax.set_ylim(np.nanmin(pts.imag) - r, np.nanmax(pts.imag) + r)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def plot_convergence(report, path) -> None:
    """Log-log plot of the error norms against eps."""
    eps = report.column("eps")
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = {"err_q": "q - g'", "err_g": "g_n - g", "err_t": "t - h",
              "err_d1": "first differences"}
    for key, lab in labels.items():
        y = report.column(key)
        if np.all(y > 0):
            slope = report.slopes.get(key[4:], float("nan"))
            ax.loglog(eps, y, "o-", label=f"{lab} (slope {slope:.2f})")
    ax.set_xlabel("eps")
    ax.set_ylabel("sup error on K")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
