"""Heatmap of the endpoint-density ratio rho(y).

Reads the CSV written by `cond-walk exp lclt`: one row per qualified
endpoint cell y with the measured density, the local-limit prediction
a(y)^2/(n ln^2 n), and their ratio rho.  The figure paints rho over the
lattice; unqualified cells (wrong parity, too far out, too few hits)
stay blank.  The colorbar is pinned exactly to the min and max of the
ratio column so the plotted range is the measured range.
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib
import numpy as np

import figlib
from figlib import FigureSpec

COLUMNS = ("y1", "y2", "count", "p_hat", "prediction", "ratio")


def ratio_grid(rows):
    """Dense (grid, extent) for imshow, nan outside the qualified cells."""
    y1 = np.array([int(row["y1"]) for row in rows])
    y2 = np.array([int(row["y2"]) for row in rows])
    ratio = np.array([row["ratio"] for row in rows])
    lo1, hi1 = y1.min(), y1.max()
    lo2, hi2 = y2.min(), y2.max()
    grid = np.full((hi2 - lo2 + 1, hi1 - lo1 + 1), np.nan)
    grid[y2 - lo2, y1 - lo1] = ratio
    extent = (lo1 - 0.5, hi1 + 0.5, lo2 - 0.5, hi2 + 0.5)
    return grid, extent


def render(csv_path: Path, out_path: Path) -> None:
    rows = figlib.read_table(csv_path, COLUMNS)
    summary = figlib.load_summary(csv_path, "lclt")
    cfg = summary["config"]

    grid, extent = ratio_grid(rows)
    ratios = np.array([row["ratio"] for row in rows])

    cmap = matplotlib.colormaps["viridis"].copy()
    cmap.set_bad(alpha=0.0)  # unqualified cells stay blank
    fig = figlib.new_figure(6.0, 5.2)
    ax = fig.add_subplot()
    image = ax.imshow(
        grid, origin="lower", extent=extent, cmap=cmap,
        vmin=float(ratios.min()), vmax=float(ratios.max()),
        interpolation="nearest",
    )
    fig.colorbar(image, ax=ax, label="rho = measured / predicted")
    ax.plot(0, 0, "rx", markersize=6, label="origin")
    ax.set_xlabel("y1")
    ax.set_ylabel("y2")
    ax.set_title(
        f"Endpoint density vs a(y)^2/(n ln^2 n) at n = {int(cfg['n'])}, "
        f"start {tuple(cfg['start'])}"
    )
    ax.legend(fontsize=8, loc="upper right")

    figlib.save(fig, FigureSpec(csv_path, "heatmap", out_path), summary)


def main(argv) -> int:
    return figlib.run_script(render, argv, "plot_lclt.py <lclt.csv> <out.png>")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
