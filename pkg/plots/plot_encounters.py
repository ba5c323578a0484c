"""Window meeting fractions for two conditioned walks, with an n*p inset.

Reads the CSV written by `cond-walk exp encounters`.  Its rows come in
two kinds: "grid" rows carry the meeting probability p_n over probe
windows (the sandwich estimate n*p_n), "window" rows carry the fraction
of pairs that met at least once in each occupation window.  The main
axes show the window fractions as bars against the fraction gate; the
inset shows n*p_n over the probe grid with the flatness band implied by
the sandwich gate: with threshold T and floor m = min(n*p_n), every
point must land inside [m, T*m] for the gate to hold.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

import figlib
from figlib import FigureSpec

COLUMNS = ("row_kind", "k", "lo", "hi", "mean_count", "p_hat", "n_p_hat", "frac_ge1")


def flatness_band(n_p_hat, threshold):
    floor = float(np.min(n_p_hat))
    return floor, threshold * floor


def render(csv_path: Path, out_path: Path) -> None:
    rows = figlib.read_table(csv_path, COLUMNS)
    summary = figlib.load_summary(csv_path, "encounters")

    grid_rows = [row for row in rows if row["row_kind"] == "grid"]
    window_rows = [row for row in rows if row["row_kind"] == "window"]
    if not grid_rows or not window_rows:
        raise figlib.DataError(f"{csv_path}: needs both grid and window rows")

    frac_gate = figlib.gate_by_name(summary, "window_fraction_k0")
    flat_gate = figlib.gate_by_name(summary, "sandwich_flatness")

    fig = figlib.new_figure(6.8, 4.6)
    ax = fig.add_subplot()
    positions = np.arange(len(window_rows))
    fractions = [row["frac_ge1"] for row in window_rows]
    labels = [f"[{int(row['lo'])}, {int(row['hi'])})" for row in window_rows]
    bars = ax.bar(positions, fractions, color="tab:blue", alpha=0.8)
    ax.bar_label(bars, fmt="%.3f", fontsize=8)
    ax.axhline(frac_gate["threshold"], color="tab:red", linestyle="--",
               label=f"gate: fraction >= {frac_gate['threshold']:g}")
    ax.set_xticks(positions, labels, fontsize=8)
    ax.set_xlabel("occupation window [steps]")
    ax.set_ylabel("pairs meeting at least once")
    ax.set_ylim(0, max(max(fractions), frac_gate["threshold"]) * 1.3)
    ax.set_title("Meetings of two independent origin-avoiding walks")
    ax.legend(fontsize=8, loc="upper right")

    inset = ax.inset_axes([0.58, 0.45, 0.4, 0.35])
    ns = np.array([row["lo"] for row in grid_rows])
    n_p = np.array([row["n_p_hat"] for row in grid_rows])
    lo_band, hi_band = flatness_band(n_p, flat_gate["threshold"])
    inset.axhspan(lo_band, hi_band, color="tab:green", alpha=0.15)
    inset.plot(ns, n_p, "o-", color="tab:green", markersize=3, linewidth=1)
    inset.set_xscale("log", base=2)
    inset.set_ylim(0, hi_band * 1.2)
    inset.set_title(f"n*p_n (flat within x{flat_gate['threshold']:g})", fontsize=8)
    inset.tick_params(labelsize=7)

    figlib.save(fig, FigureSpec(csv_path, "bars", out_path), summary)


def main(argv) -> int:
    return figlib.run_script(render, argv, "plot_encounters.py <encounters.csv> <out.png>")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
