"""Shared plumbing for the figure scripts.

The scripts in this directory consume the CSV/JSON artifacts written by
the `cond-walk exp` commands and render figures from them.  They are a
separate component: nothing here imports the walk package, and nothing
here computes statistics.  Each script validates the CSV header against
the producing command's documented schema, reads the sibling
`<stem>.summary.json` for the run's seed and gates, and embeds both the
seed and the schema version in the figure caption and in the PNG text
metadata so a figure can always be traced back to its run.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

# the one summary-file format these scripts know how to read
SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_DATA = 1


class DataError(Exception):
    """Input artifact is missing, malformed, or off-schema."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: where its data lives, what to draw, where it goes."""

    csv_path: Path
    kind: str  # "envelope" | "heatmap" | "bars" | "decay"
    out_path: Path


def read_table(path: Path, expected_columns: tuple[str, ...]) -> list[dict]:
    """Read one experiment CSV, enforcing the exact header.

    Cells come back as floats where they parse (including nan/inf),
    otherwise as the raw string.  Empty data sections are an error: a
    figure of nothing helps nobody.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != expected_columns:
            raise DataError(
                f"{path}: schema mismatch: expected columns "
                f"{','.join(expected_columns)} but found {','.join(header)}"
            )
        rows = [dict(zip(header, map(_cell, row))) for row in reader]
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def _cell(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def load_summary(csv_path: Path, experiment: str) -> dict:
    """Read the sibling summary.json and check it describes this run."""
    path = Path(csv_path).parent / (Path(csv_path).stem + ".summary.json")
    if not path.is_file():
        raise DataError(f"{path}: summary not found next to {csv_path}")
    with open(path, encoding="utf-8") as fh:
        try:
            summary = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc})") from None
    if summary.get("schema_version") != SCHEMA_VERSION:
        raise DataError(
            f"{path}: schema_version {summary.get('schema_version')!r}, "
            f"these scripts read version {SCHEMA_VERSION}"
        )
    if summary.get("experiment") != experiment:
        raise DataError(
            f"{path}: describes experiment {summary.get('experiment')!r}, "
            f"expected {experiment!r}"
        )
    return summary


def gate_by_name(summary: dict, name: str) -> dict:
    for gate in summary.get("gates", []):
        if gate.get("name") == name:
            return gate
    raise DataError(f"summary has no gate named {name!r}")


def check_recomputed(path: Path, column: str, stored, recomputed, tol=1e-9):
    """Formula columns must match their definitions when re-evaluated."""
    if not math.isfinite(stored) or abs(stored - recomputed) > tol:
        raise DataError(
            f"{path}: column {column!r} holds {stored!r} but re-evaluates "
            f"to {recomputed!r} (tolerance {tol:g})"
        )


def new_figure(width=6.4, height=4.4):
    return plt.figure(figsize=(width, height), layout="constrained")


def save(fig, spec: FigureSpec, summary: dict) -> None:
    """Stamp provenance on the figure and write it.

    The caption and the PNG text chunks both carry the producing run's
    master seed and the summary schema version; the caption is for eyes,
    the metadata is for tools.
    """
    seed = summary["config"]["master_seed"]
    caption = (
        f"source: {Path(spec.csv_path).name}   seed: {seed}   "
        f"schema: v{summary['schema_version']}"
    )
    fig.text(0.01, 0.005, caption, fontsize=7, family="monospace", color="0.35")
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(
        out,
        dpi=150,
        metadata={
            "condwalk:seed": str(seed),
            "condwalk:schema_version": str(summary["schema_version"]),
            "condwalk:source": Path(spec.csv_path).name,
        },
    )
    plt.close(fig)


def run_script(render, argv, usage: str) -> int:
    """Shared CLI entry for the single-figure scripts."""
    if len(argv) != 2:
        print(f"usage: {usage}", file=sys.stderr)
        return 2
    try:
        render(Path(argv[0]), Path(argv[1]))
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK
