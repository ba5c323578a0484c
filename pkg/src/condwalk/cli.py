"""Command-line entry point.

Exit codes: 0 all gates passed, 1 a statistical gate failed, 2 usage or
configuration error, 3 internal numerical failure (an exact identity or
oracle check broke).  Diagnostics go to stderr; data goes to files named
by --out or to stdout, never anywhere else.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import CondWalkError, ConfigError, DomainError
from .experiments import (
    SCHEMA_VERSION,
    EncounterWindows,
    ExperimentReport,
    GateResult,
    exp_confinement_tail,
    exp_encounters,
    exp_lclt,
    exp_minimum,
    exp_srw_recurrence,
)
from .montecarlo import (
    EstimatorConfig,
    estimate_green,
    estimate_hit_prob,
    estimate_return_prob,
    report_row,
    REPORT_HEADER,
)
from .potential import build_table, default_table, potential, potential_oracle
from .rng import Stream
from .theory import (
    annulus_escape_prob,
    escape_prob,
    green,
    hit_prob,
    lclt_prediction,
    return_prob,
)
from .walk import WalkKind, sample_path

_EXIT_OK = 0
_EXIT_GATE = 1
_EXIT_USAGE = 2
_EXIT_NUMERICAL = 3


def _point(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected X1,X2 got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get("COND_WALK_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"COND_WALK_SEED must be an integer, got {raw!r}") from None


def _default_workers() -> int:
    return os.cpu_count() or 1


def _common_flags(p: argparse.ArgumentParser, *, out_dir: bool = False) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: COND_WALK_SEED env var, else 0)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: machine parallelism)")
    if out_dir:
        p.add_argument("--out", default=".",
                       help="output directory for CSV and summary files")
    else:
        p.add_argument("--out", default=None,
                       help="output file (default: stdout)")


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _write_lines(path, lines) -> None:
    fh, close = _open_out(path)
    try:
        for line in lines:
            fh.write(line + "\n")
    finally:
        if close:
            fh.close()


# ---------------------------------------------------------------------------
# potential

def _cmd_potential_dump(args) -> int:
    table = default_table()
    radius = float(args.radius)
    if radius < 0:
        raise ConfigError("--radius must be nonnegative")
    span = math.floor(radius)
    exact_rr = table.exact_radius * table.exact_radius

    def rows():
        yield "x1,x2,a,source"
        for x1 in range(-span, span + 1):
            for x2 in range(-span, span + 1):
                rr = x1 * x1 + x2 * x2
                if rr > radius * radius:
                    continue
                source = "exact" if rr <= exact_rr else "asymptotic"
                yield "%d,%d,%.17g,%s" % (x1, x2, potential((x1, x2), table), source)

    _write_lines(args.out, rows())
    return _EXIT_OK


def _cmd_potential_query(args) -> int:
    value = potential((args.x1, args.x2), default_table())
    print("%.12f" % value)
    return _EXIT_OK


# ---------------------------------------------------------------------------
# walk

def _cmd_walk_sample(args) -> int:
    kind = WalkKind.SRW if args.kind == "srw" else WalkKind.CONDITIONED
    seed = args.seed if args.seed is not None else _default_seed()
    traj = sample_path(kind, args.start, args.steps, Stream(seed, 0))
    lines = ["n,x1,x2"]
    lines.extend(
        "%d,%d,%d" % (n, pos[0], pos[1]) for n, pos in enumerate(traj.positions)
    )
    _write_lines(args.out, lines)
    return _EXIT_OK


# ---------------------------------------------------------------------------
# theory

def _cmd_theory_eval(args) -> int:
    def need(flag, value):
        if value is None:
            raise ConfigError(f"--formula {args.formula} requires --{flag}")
        return value

    f = args.formula
    payload: dict = {"formula": f}
    if f == "return":
        x = need("x", args.x)
        payload["x"] = list(x)
        payload["value"] = return_prob(x)
    elif f == "hit":
        x, y = need("x", args.x), need("y", args.y)
        payload["x"], payload["y"] = list(x), list(y)
        payload["value"] = hit_prob(x, y)
    elif f == "green":
        x, y = need("x", args.x), need("y", args.y)
        payload["x"], payload["y"] = list(x), list(y)
        payload["value"] = green(x, y)
    elif f == "escape":
        x, n = need("x", args.x), need("n", args.n)
        payload["x"], payload["n"] = list(x), n
        b = escape_prob(x, n)
        payload.update(value=b.value, sys_lo=b.sys_lo, sys_hi=b.sys_hi)
    elif f == "annulus":
        x = need("x", args.x)
        r, L = need("r", args.r), need("L", args.L)
        payload["x"], payload["r"], payload["L"] = list(x), r, L
        b = annulus_escape_prob(x, r, L)
        payload.update(value=b.value, sys_lo=b.sys_lo, sys_hi=b.sys_hi)
    else:  # lclt
        n, y = need("n", args.n), need("y", args.y)
        payload["n"], payload["y"] = n, list(y)
        payload["value"] = lclt_prediction(n, y)
    print(json.dumps(payload, sort_keys=True))
    return _EXIT_OK


# ---------------------------------------------------------------------------
# monte carlo

def _mc_config(args) -> EstimatorConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    workers = args.workers if args.workers is not None else _default_workers()
    return EstimatorConfig(
        trials=args.trials,
        master_seed=seed,
        horizon=args.horizon,
        truncation_radius=args.radius,
        workers=workers,
    )


def _cmd_mc(args) -> int:
    cfg = _mc_config(args)
    if args.mc_case == "return":
        rep = estimate_return_prob(args.x, cfg)
    elif args.mc_case == "hit":
        if args.y is None:
            raise ConfigError("mc hit requires --y")
        rep = estimate_hit_prob(args.x, args.y, cfg)
    else:
        if args.y is None:
            raise ConfigError("mc green requires --y")
        rep = estimate_green(args.x, args.y, cfg)
    _write_lines(args.out, [REPORT_HEADER, report_row(rep)])
    if rep.horizon_warning:
        print(
            f"warning: {rep.estimate.exhausted_fraction:.2e} of trials hit the "
            "step horizon; the widened bracket accounts for them",
            file=sys.stderr,
        )
    if rep.z_score > 2.0:
        print(f"gate failed: z = {rep.z_score:.3f} > 2", file=sys.stderr)
        return _EXIT_GATE
    return _EXIT_OK


# ---------------------------------------------------------------------------
# experiments

def _exp_config(args, trials_default) -> EstimatorConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    workers = args.workers if args.workers is not None else _default_workers()
    trials = args.trials if args.trials is not None else trials_default
    return EstimatorConfig(trials=trials, master_seed=seed, workers=workers)


def _emit_report(report: ExperimentReport, out_dir: str, stem: str, extra_config) -> int:
    report.config.update(extra_config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / f"{stem}.csv")
    report.write_summary(out / f"{stem}.summary.json")
    for g in report.gates:
        status = "PASS" if g.passed else "FAIL"
        print(f"{status} {g.name}: {g.value:.6g} {g.comparison} "
              f"{g.threshold:.6g}", file=sys.stderr)
    if report.inconclusive:
        print("inconclusive: too few events for the fit; raise --trials",
              file=sys.stderr)
    return _EXIT_OK if report.passed else _EXIT_GATE


def _windows_from_args(args) -> EncounterWindows:
    return EncounterWindows(
        growth=args.growth, k_max=args.k_max, b0=args.b0, g=args.g
    )


def _cmd_exp_minimum(args) -> int:
    cfg = _exp_config(args, 10_000)
    rep = exp_minimum(args.delta, args.horizons, cfg)
    return _emit_report(rep, args.out, "minimum", {"command": "exp minimum"})


def _cmd_exp_lclt(args) -> int:
    cfg = _exp_config(args, 2_000_000)
    rep = exp_lclt(args.n, args.start, cfg)
    return _emit_report(rep, args.out, "lclt", {"command": "exp lclt"})


def _cmd_exp_encounters(args) -> int:
    cfg = _exp_config(args, 20_000)
    rep = exp_encounters(args.x1, args.x2, _windows_from_args(args), cfg)
    return _emit_report(rep, args.out, "encounters", {"command": "exp encounters"})


def _cmd_exp_srw(args) -> int:
    cfg = _exp_config(args, 20_000)
    rep = exp_srw_recurrence(_windows_from_args(args), cfg)
    return _emit_report(rep, args.out, "srw-recurrence",
                        {"command": "exp srw-recurrence"})


def _cmd_exp_confinement(args) -> int:
    cfg = _exp_config(args, 200_000)
    radii = args.radii
    if len(radii) < 1:
        raise ConfigError("--radii must name at least one radius")
    reports = []
    for r in radii:
        grid = [m * r * r for m in args.t_multiples]
        reports.append(exp_confinement_tail(r, grid, cfg))

    columns = ("r",) + reports[0].columns
    rows = [(rep.config["r"],) + row for rep in reports for row in rep.rows]
    gates: list[GateResult] = []
    for rep in reports:
        r = rep.config["r"]
        gates.extend(
            GateResult(f"r{r}_{g.name}", g.value, g.threshold, g.comparison,
                       g.passed, g.note)
            for g in rep.gates
        )
    inconclusive = any(rep.inconclusive for rep in reports)
    if len(reports) >= 2 and not inconclusive:
        # decay rates live on the t/r^2 clock, so they must agree across radii
        slopes = [rep.config["slope"] for rep in reports]
        ratio = max(slopes) / min(slopes) if min(slopes) < 0 else math.inf
        gates.append(GateResult(
            "slope_ratio_across_radii", float(ratio), 2.0, "<=", ratio <= 2.0,
            note=f"radii {radii}",
        ))
    combined = ExperimentReport(
        name="confinement",
        config={
            "trials": cfg.trials, "master_seed": cfg.master_seed,
            "workers": cfg.workers, "radii": list(radii),
            "t_multiples": list(args.t_multiples),
            "per_radius": [rep.config for rep in reports],
        },
        columns=columns,
        rows=rows,
        gates=gates,
        inconclusive=inconclusive,
    )
    return _emit_report(combined, args.out, "confinement",
                        {"command": "exp confinement"})


# ---------------------------------------------------------------------------
# verify

def _verify_checks(radius: int, tol: float):
    """Exact-identity suite over the disk B(radius); yields (name, max_err)."""
    table = default_table() if radius <= default_table().exact_radius else build_table(radius)
    pts = [
        (x1, x2)
        for x1 in range(-radius, radius + 1)
        for x2 in range(-radius, radius + 1)
        if 0 < x1 * x1 + x2 * x2 <= (radius - 1) ** 2
    ]

    err = abs(potential((0, 0), table))
    for p in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        err = max(err, abs(potential(p, table) - 1.0))
    yield "origin_and_neighbors", err

    def a(p):
        return potential(p, table)

    err = 0.0
    for x1, x2 in pts:
        mean = 0.25 * (a((x1 + 1, x2)) + a((x1 - 1, x2))
                       + a((x1, x2 + 1)) + a((x1, x2 - 1)))
        err = max(err, abs(mean - a((x1, x2))))
    yield "harmonic_off_origin", err
    origin_mean = 0.25 * sum(a(p) for p in ((1, 0), (-1, 0), (0, 1), (0, -1)))
    yield "unit_source_at_origin", abs(origin_mean - 1.0)

    err = 0.0
    for x1, x2 in pts:
        ax = a((x1, x2))
        row = sum(a(p) for p in ((x1 + 1, x2), (x1 - 1, x2),
                                 (x1, x2 + 1), (x1, x2 - 1))) / (4.0 * ax)
        err = max(err, abs(row - 1.0))
    yield "transition_rows_sum_to_one", err

    ys = [(1, 0), (1, 1), (-2, 3), (5, 0), (radius - 2, 0)]
    err = 0.0
    for x in ys:
        for y in ys:
            gx = green(x, y, table) / (a(y) * a(y)) if y != x else 0.0
            gy = green(y, x, table) / (a(x) * a(x)) if y != x else 0.0
            err = max(err, abs(gx - gy))
        # visits to the start are geometric: the diagonal Green value
        # times the escape-for-good probability must be exactly one
        err = max(err, abs(green(x, x, table) * (1.0 - return_prob(x, table)) - 1.0))
    yield "green_hit_return_identities", err

    err = 0.0
    for p in ((1, 0), (1, 1), (2, 1), (3, 4), (10, 0), (7, 7), (radius, 0)):
        err = max(err, abs(potential(p, table) - potential_oracle(p, abs_tol=tol)))
    yield "integral_oracle_agreement", err


def _cmd_verify(args) -> int:
    tol = 1e-12
    failed = False
    for name, err in _verify_checks(args.radius, tol):
        # the integral oracle is itself only good to ~1e-9
        limit = 3e-9 if name == "integral_oracle_agreement" else tol
        ok = err <= limit
        failed = failed or not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} max_err={err:.3e} limit={limit:.0e}")
    return _EXIT_NUMERICAL if failed else _EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="cond-walk",
        description="Planar random walk conditioned to avoid the origin: "
                    "exact formulas, samplers, and statistical experiments.",
    )
    sub = root.add_subparsers(dest="command", required=True)

    pot = sub.add_parser("potential", help="potential-kernel table access")
    pot_sub = pot.add_subparsers(dest="potential_cmd", required=True)
    dump = pot_sub.add_parser("dump", help="CSV of values over a disk")
    dump.add_argument("--radius", type=float, required=True)
    dump.add_argument("--out", default=None, help="output file (default: stdout)")
    dump.set_defaults(func=_cmd_potential_dump)
    query = pot_sub.add_parser("query", help="value at one lattice point")
    query.add_argument("x1", type=int)
    query.add_argument("x2", type=int)
    query.set_defaults(func=_cmd_potential_query)

    wk = sub.add_parser("walk", help="sample trajectories")
    wk_sub = wk.add_subparsers(dest="walk_cmd", required=True)
    ws = wk_sub.add_parser("sample", help="one trajectory as CSV")
    ws.add_argument("--kind", choices=("srw", "cond"), required=True)
    ws.add_argument("--start", type=_point, required=True, metavar="X1,X2")
    ws.add_argument("--steps", type=int, required=True)
    _common_flags(ws)
    ws.set_defaults(func=_cmd_walk_sample)

    th = sub.add_parser("theory", help="closed-form values")
    th_sub = th.add_subparsers(dest="theory_cmd", required=True)
    ev = th_sub.add_parser("eval", help="evaluate one formula as JSON")
    ev.add_argument("--formula", required=True,
                    choices=("return", "hit", "green", "escape", "annulus", "lclt"))
    ev.add_argument("--x", type=_point, metavar="X1,X2")
    ev.add_argument("--y", type=_point, metavar="Y1,Y2")
    ev.add_argument("--n", type=int)
    ev.add_argument("--r", type=float)
    ev.add_argument("--L", type=float)
    ev.set_defaults(func=_cmd_theory_eval)

    mc = sub.add_parser("mc", help="Monte Carlo estimates vs exact values")
    mc_sub = mc.add_subparsers(dest="mc_case", required=True)
    for case in ("return", "hit", "green"):
        p = mc_sub.add_parser(case)
        p.add_argument("--x", type=_point, required=True, metavar="X1,X2")
        if case != "return":
            p.add_argument("--y", type=_point, metavar="Y1,Y2")
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--radius", type=float, default=1e4,
                       help="truncation radius (walk declared escaped beyond)")
        p.add_argument("--horizon", type=int, default=10**8)
        _common_flags(p)
        p.set_defaults(func=_cmd_mc)

    ex = sub.add_parser("exp", help="statistical experiments with gates")
    ex_sub = ex.add_subparsers(dest="exp_name", required=True)

    em = ex_sub.add_parser("minimum", help="future minimum of the distance")
    em.add_argument("--delta", type=float, default=0.25)
    em.add_argument("--horizons", type=_int_list, default=[10**4, 10**5, 10**6])
    em.add_argument("--trials", type=int, default=None)
    _common_flags(em, out_dir=True)
    em.set_defaults(func=_cmd_exp_minimum)

    el = ex_sub.add_parser("lclt", help="endpoint histogram vs local CLT")
    el.add_argument("--n", type=int, default=10**4)
    el.add_argument("--start", type=_point, default=(1, 0), metavar="X1,X2")
    el.add_argument("--trials", type=int, default=None)
    _common_flags(el, out_dir=True)
    el.set_defaults(func=_cmd_exp_lclt)

    def add_window_flags(p, b0, k_max):
        p.add_argument("--growth", choices=("paper", "scaled"), default="scaled")
        p.add_argument("--b0", type=int, default=b0)
        p.add_argument("--g", type=int, default=4)
        p.add_argument("--k-max", type=int, default=k_max, dest="k_max")

    ee = ex_sub.add_parser("encounters", help="meetings of two conditioned walks")
    ee.add_argument("--x1", type=_point, default=(1, 0), metavar="X1,X2")
    ee.add_argument("--x2", type=_point, default=(-1, 0), metavar="X1,X2")
    add_window_flags(ee, b0=1024, k_max=4)
    ee.add_argument("--trials", type=int, default=None)
    _common_flags(ee, out_dir=True)
    ee.set_defaults(func=_cmd_exp_encounters)

    es = ex_sub.add_parser("srw-recurrence", help="origin visits of the plain walk")
    add_window_flags(es, b0=1, k_max=3)
    es.add_argument("--trials", type=int, default=None)
    _common_flags(es, out_dir=True)
    es.set_defaults(func=_cmd_exp_srw)

    ec = ex_sub.add_parser("confinement", help="survival inside a disk")
    ec.add_argument("--radii", type=_int_list, default=[50, 100])
    ec.add_argument("--t-multiples", type=_int_list, default=[1, 2, 3, 4],
                    dest="t_multiples", help="probe times as multiples of r^2")
    ec.add_argument("--trials", type=int, default=None)
    _common_flags(ec, out_dir=True)
    ec.set_defaults(func=_cmd_exp_confinement)

    vr = sub.add_parser("verify", help="exact-identity suite")
    vr.add_argument("--radius", type=int, default=60)
    vr.set_defaults(func=_cmd_verify)

    return root


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except CondWalkError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
