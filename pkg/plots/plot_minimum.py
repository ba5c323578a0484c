"""Future-minimum quantile fan with its theoretical envelopes.

Reads the CSV written by `cond-walk exp minimum`: one row per probed
horizon n with quantiles of the future minimum M_n and the precomputed
scale columns.  The figure shows the 5%..95% quantile fan of M_n on
log-log axes with four envelope curves overlaid:

    n^delta            (infinitely-often lower shadow)
    sqrt(n)/ln^delta n (the rate-carrying level m(n))
    e^(ln^(1-delta) n) (eventual lower envelope)
    sqrt((e+delta) n ln ln n)  (eventual upper envelope)

Before drawing, every formula column in the CSV is re-evaluated from n
and delta and must agree to 1e-9; disagreement means the artifact is
corrupt and the script refuses to plot it.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

import figlib
from figlib import FigureSpec

COLUMNS = (
    "n", "m_n", "l_n", "u_n", "target_rate", "p_above_m", "stderr_above_m",
    "rate_ratio", "p_above_u", "frac_below_ndelta", "q05", "q50", "q95",
    "upper_envelope", "lower_envelope", "frac_above_upper", "frac_below_lower",
)

# the formula behind each precomputed column, keyed as f(n, delta)
FORMULAS = {
    "m_n": lambda n, d: math.sqrt(n) / math.log(n) ** d,
    "l_n": lambda n, d: math.sqrt(n) / math.log(math.log(n)),
    "u_n": lambda n, d: math.sqrt(n) * math.log(math.log(n)),
    "upper_envelope": lambda n, d: math.sqrt((math.e + d) * n * math.log(math.log(n))),
    "lower_envelope": lambda n, d: math.exp(math.log(n) ** (1.0 - d)),
}


def render(csv_path: Path, out_path: Path) -> None:
    rows = figlib.read_table(csv_path, COLUMNS)
    summary = figlib.load_summary(csv_path, "minimum")
    delta = summary["config"]["delta"]

    for row in rows:
        for column, formula in FORMULAS.items():
            figlib.check_recomputed(
                csv_path, column, row[column], formula(row["n"], delta)
            )

    ns = np.array([row["n"] for row in rows])
    q05 = np.array([row["q05"] for row in rows])
    q50 = np.array([row["q50"] for row in rows])
    q95 = np.array([row["q95"] for row in rows])

    fig = figlib.new_figure()
    ax = fig.add_subplot()
    ax.fill_between(ns, q05, q95, color="tab:blue", alpha=0.2,
                    label="M_n 5%..95% quantiles")
    ax.plot(ns, q50, "o-", color="tab:blue", label="M_n median")

    # smooth curves for the envelopes; the data rows only pin a few n
    grid = np.geomspace(ns.min(), ns.max(), 256)
    curves = (
        (grid**delta, f"n^{delta:g}", "tab:red", ":"),
        (np.sqrt(grid) / np.log(grid) ** delta,
         f"sqrt(n)/ln^{delta:g} n", "tab:green", "--"),
        (np.exp(np.log(grid) ** (1.0 - delta)),
         f"exp(ln^{1.0 - delta:g} n)", "tab:orange", "-."),
        (np.sqrt((math.e + delta) * grid * np.log(np.log(grid))),
         f"sqrt(({math.e + delta:.3g}) n lnln n)", "tab:purple", "--"),
    )
    for values, label, color, style in curves:
        ax.plot(grid, values, style, color=color, label=label, linewidth=1.2)

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("horizon n")
    ax.set_ylabel("future minimum distance")
    ax.set_title(f"Future minimum of the origin-avoiding walk (delta = {delta:g})")
    ax.legend(fontsize=8, loc="upper left")
    ax.grid(True, which="both", alpha=0.25)

    figlib.save(fig, FigureSpec(csv_path, "envelope", out_path), summary)


def main(argv) -> int:
    return figlib.run_script(render, argv, "plot_minimum.py <minimum.csv> <out.png>")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
