"""Survival decay of the walk confined to an annulus, on the t/r^2 clock.

Reads the CSV written by `cond-walk exp confinement`: rows for one or
more radii r with the survival probability p_hat at probe times t.  The
figure plots p_hat against t/r^2 on a log-linear scale; curves for
different radii should collapse onto a common exponential decay.  The
fitted slope shown per radius is read from the summary (it was fitted
by the experiment), never recomputed here; the line is anchored through
the centroid of that radius' points, which is where a least-squares fit
with that slope passes.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

import figlib
from figlib import FigureSpec

COLUMNS = ("r", "t", "t_over_r2", "survivors", "p_hat", "log_p_hat")

_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:purple", "tab:red")


def render(csv_path: Path, out_path: Path) -> None:
    rows = figlib.read_table(csv_path, COLUMNS)
    summary = figlib.load_summary(csv_path, "confinement")
    slope_by_radius = {
        per["r"]: per["slope"] for per in summary["config"]["per_radius"]
    }

    fig = figlib.new_figure()
    ax = fig.add_subplot()
    radii = sorted({int(row["r"]) for row in rows})
    for i, r in enumerate(radii):
        color = _COLORS[i % len(_COLORS)]
        mine = [row for row in rows if int(row["r"]) == r]
        x = np.array([row["t_over_r2"] for row in mine])
        p = np.array([row["p_hat"] for row in mine])
        ax.plot(x, p, "o", color=color, label=f"r = {r}")
        slope = slope_by_radius.get(r)
        if slope is None:
            continue  # inconclusive run for this radius: points only
        # anchor through the centroid of the rows the fit actually used
        fitted = [row for row in mine if row["survivors"] > 0]
        fit_x = np.array([row["t_over_r2"] for row in fitted])
        logp = np.array([row["log_p_hat"] for row in fitted])
        intercept = float(logp.mean() - slope * fit_x.mean())
        line_x = np.linspace(fit_x.min(), fit_x.max(), 64)
        ax.plot(line_x, np.exp(slope * line_x + intercept), "-", color=color,
                linewidth=1.2, label=f"fit: slope {slope:.3f} per r^2")

    ax.set_yscale("log")
    ax.set_xlabel("t / r^2")
    ax.set_ylabel("P[still confined at t]")
    ax.set_title("Confinement survival, collapsed on the diffusive clock")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)

    figlib.save(fig, FigureSpec(csv_path, "decay", out_path), summary)


def main(argv) -> int:
    return figlib.run_script(render, argv, "plot_confinement.py <confinement.csv> <out.png>")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
