"""Experiment-layer tests: scale formulas, window grids, report gates.

Statistical assertions here run at reduced trial counts with pinned seeds,
so every expected pass was observed, not hoped for.  The last-exit identity
gets an independent oracle through the pure Python walk before trusting the
in-experiment gate.
"""

import json
import math

import numpy as np
import pytest

from condwalk.errors import ConfigError, DomainError
from condwalk.experiments import (
    EncounterWindows,
    ExperimentReport,
    GateResult,
    MinimumScales,
    exp_confinement_tail,
    exp_encounters,
    exp_lclt,
    exp_minimum,
    exp_srw_recurrence,
)
from condwalk.montecarlo import EstimatorConfig
from condwalk.rng import Stream
from condwalk.walk import WalkKind, sample_path


def _cfg(trials, seed=7, workers=1):
    return EstimatorConfig(trials=trials, master_seed=seed, workers=workers)


# ---------------------------------------------------------------------------
# scale formulas

class TestMinimumScales:
    def test_values_at_reference_point(self):
        sc = MinimumScales(10**4, 0.25)
        lnln = math.log(math.log(10**4))
        assert sc.u == pytest.approx(100.0 * lnln, rel=1e-12)
        assert sc.l == pytest.approx(100.0 / lnln, rel=1e-12)
        assert sc.m == pytest.approx(100.0 / math.log(10**4) ** 0.25, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            MinimumScales(8, 0.25)
        with pytest.raises(DomainError):
            MinimumScales(10**4, 0.05)
        with pytest.raises(DomainError):
            MinimumScales(10**4, 0.45)

    def test_ordering_threshold_is_astronomical_at_quarter(self):
        # at delta = 1/4 the crossover of (ln n)^delta and ln ln n sits
        # beyond any reachable n, so desk scales see m > l
        assert MinimumScales.ordering_threshold(0.25) == math.inf
        sc = MinimumScales(10**6, 0.25)
        assert sc.m > sc.l

    def test_ordering_threshold_separates_regimes(self):
        thr = MinimumScales.ordering_threshold(0.40)
        assert math.e**math.e * 0.9 < thr < 20.0
        above = MinimumScales(17, 0.40)
        assert above.m < above.l < above.u
        # below the threshold the typical-range bracket inverts
        below = MinimumScales(16, 0.40)  # 16 > thr, pick n = 12 via raw formulas
        n = 12
        lnln = math.log(math.log(n))
        assert math.sqrt(n) / lnln > math.sqrt(n) * lnln
        assert below.l < below.u  # while 17 > e^e keeps the bracket ordered

    def test_ordering_threshold_domain(self):
        with pytest.raises(DomainError):
            MinimumScales.ordering_threshold(0.0)
        with pytest.raises(DomainError):
            MinimumScales.ordering_threshold(0.5)


class TestEncounterWindows:
    def test_paper_boundaries(self):
        w = EncounterWindows(growth="paper", k_max=2)
        assert w.boundaries().tolist() == [2, 20, 8103]

    def test_paper_depth_is_capped(self):
        with pytest.raises(DomainError):
            EncounterWindows(growth="paper", k_max=3)

    def test_scaled_boundaries(self):
        w = EncounterWindows(growth="scaled", b0=1024, g=4, k_max=4)
        assert w.boundaries().tolist() == [1024, 4096, 16384, 65536, 262144]

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(growth="cubic"),
            dict(g=1),
            dict(b0=0),
            dict(k_max=0),
        ],
    )
    def test_invalid_configs(self, kwargs):
        with pytest.raises(DomainError):
            EncounterWindows(**kwargs)

    def test_boundaries_strictly_increase(self):
        for b0 in (1, 7, 1024):
            for g in (2, 3, 10):
                b = EncounterWindows(growth="scaled", b0=b0, g=g, k_max=5).boundaries()
                assert (np.diff(b) > 0).all()


# ---------------------------------------------------------------------------
# report plumbing

def test_report_csv_and_summary_round_trip(tmp_path):
    rep = ExperimentReport(
        name="demo",
        config={"trials": 3},
        columns=("kind", "k", "value", "flag"),
        rows=[("grid", 1, 0.1 + 0.2, True), ("window", 2, float("nan"), False)],
        gates=[GateResult("g0", 1.5, 2.0, "<=", True, note="n")],
    )
    csv_path = tmp_path / "rows.csv"
    json_path = tmp_path / "summary.json"
    rep.write_csv(csv_path)
    rep.write_summary(json_path)

    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "kind,k,value,flag"
    cells = lines[1].split(",")
    assert cells[0] == "grid" and cells[1] == "1" and cells[3] == "true"
    assert float(cells[2]) == 0.1 + 0.2  # 17 digits survive the round trip
    assert lines[2].split(",")[2] == "nan"

    payload = json.loads(json_path.read_text(encoding="utf-8"))
    assert payload["schema_version"] == 1
    assert payload["experiment"] == "demo"
    assert payload["passed"] is True
    assert payload["gates"][0]["comparison"] == "<="


def test_report_failure_and_inconclusive_flags():
    bad = GateResult("g", 3.0, 2.0, "<=", False)
    rep = ExperimentReport("d", {}, ("a",), [], gates=[bad])
    assert not rep.passed
    rep2 = ExperimentReport("d", {}, ("a",), [], gates=[], inconclusive=True)
    assert not rep2.passed


# ---------------------------------------------------------------------------
# last-exit identity, independent oracle

def test_last_exit_time_matches_future_minimum_on_python_paths(table64):
    """{T_u >= n} and {M_n <= u} must coincide path by path.

    Both sides are computed by direct scans of trajectories from the pure
    Python sampler, with the path's own tail standing in for infinity.
    """
    length = 3000
    for sid in range(8):
        pos = sample_path(
            WalkKind.CONDITIONED, (1, 0), length, Stream(401, sid), table=table64
        ).positions
        r = np.hypot(pos[:, 0], pos[:, 1])
        suffix_min = np.minimum.accumulate(r[::-1])[::-1]
        for u in (1.0, 3.0, 10.0, 40.0):
            within = np.nonzero(r <= u)[0]
            t_u = int(within[-1]) if within.size else -1
            for n in (0, 1, 17, 400, 2999):
                assert (t_u >= n) == (suffix_min[n] <= u)


# ---------------------------------------------------------------------------
# future minimum

class TestMinimumExperiment:
    def test_gates_pass_at_small_scale(self, mc_table64):
        rep = exp_minimum(0.25, [10**3, 10**4], _cfg(2000, seed=11), table=mc_table64)
        assert rep.passed
        names = {g.name for g in rep.gates}
        assert {"rate_factor2_n1000", "rate_factor2_lo_n10000",
                "io_shadow", "last_exit_identity"} <= names
        identity = next(g for g in rep.gates if g.name == "last_exit_identity")
        assert identity.value == 1.0

    def test_rows_carry_scales_and_quantiles(self, mc_table64):
        rep = exp_minimum(0.25, [10**3], _cfg(500, seed=2), table=mc_table64)
        row = dict(zip(rep.columns, rep.rows[0]))
        assert row["n"] == 10**3
        assert row["m_n"] == pytest.approx(MinimumScales(10**3, 0.25).m)
        assert 0.0 < row["q05"] <= row["q50"] <= row["q95"]
        assert row["frac_above_upper"] <= 0.1

    def test_worker_invariance(self, mc_table64):
        a = exp_minimum(0.25, [10**3], _cfg(6000, seed=5, workers=1), table=mc_table64)
        b = exp_minimum(0.25, [10**3], _cfg(6000, seed=5, workers=3), table=mc_table64)
        assert a.rows == b.rows

    def test_domain_errors(self, mc_table64):
        cfg = _cfg(10)
        with pytest.raises(DomainError):
            exp_minimum(0.25, [10**4, 10**3], cfg, table=mc_table64)
        with pytest.raises(DomainError):
            exp_minimum(0.25, [], cfg, table=mc_table64)
        with pytest.raises(DomainError):
            exp_minimum(0.25, [10**3, 2 * 10**7], cfg, table=mc_table64)
        with pytest.raises(DomainError):
            exp_minimum(0.50, [10**3], cfg, table=mc_table64)


# ---------------------------------------------------------------------------
# local CLT

class TestLcltExperiment:
    def test_gates_pass_and_invariants_hold(self, mc_table64):
        rep = exp_lclt(1000, (1, 0), _cfg(200_000, seed=3), table=mc_table64)
        assert rep.passed
        by_name = {g.name: g for g in rep.gates}
        assert by_name["wrong_parity_hits"].value == 0.0
        assert by_name["origin_hits"].value == 0.0
        assert by_name["ratio_spread"].value < 5.0  # far inside the 50x gate
        assert rep.config["overflow"] >= 0
        for row in rep.rows:
            y1, y2, count = row[0], row[1], row[2]
            assert (y1 + y2) % 2 == (1 + 0 + 1000) % 2
            assert count >= 100

    def test_worker_invariance(self, mc_table64):
        a = exp_lclt(1000, (1, 0), _cfg(30_000, seed=8, workers=1),
                     table=mc_table64, min_hits=10)
        b = exp_lclt(1000, (1, 0), _cfg(30_000, seed=8, workers=2),
                     table=mc_table64, min_hits=10)
        assert a.rows == b.rows
        assert a.config["overflow"] == b.config["overflow"]

    def test_off_axis_start_skips_mirror_gate(self, mc_table64):
        rep = exp_lclt(1000, (1, 1), _cfg(30_000, seed=4), table=mc_table64, min_hits=10)
        mirror = next(g for g in rep.gates if g.name == "mirror_symmetry")
        assert mirror.passed and "not applicable" in mirror.note

    def test_domain_errors(self, mc_table64):
        cfg = _cfg(10)
        with pytest.raises(DomainError):
            exp_lclt(999, (1, 0), cfg, table=mc_table64)  # odd horizon
        with pytest.raises(DomainError):
            exp_lclt(500, (1, 0), cfg, table=mc_table64)  # below range
        with pytest.raises(DomainError):
            exp_lclt(1000, (0, 0), cfg, table=mc_table64)
        with pytest.raises(DomainError):
            exp_lclt(1000, (40, 0), cfg, table=mc_table64)  # |start| > sqrt(n)

    def test_too_few_trials_is_a_config_error(self, mc_table64):
        with pytest.raises(ConfigError):
            exp_lclt(1000, (1, 0), _cfg(200, seed=1), table=mc_table64)


# ---------------------------------------------------------------------------
# encounters

class TestEncountersExperiment:
    def test_structure_and_swap_gate(self, mc_table64):
        win = EncounterWindows(growth="scaled", b0=64, g=4, k_max=2)
        rep = exp_encounters((1, 0), (-1, 0), win, _cfg(1500, seed=6), table=mc_table64)
        by_name = {g.name: g for g in rep.gates}
        assert by_name["swap_invariance"].passed
        assert math.isfinite(by_name["sandwich_flatness"].value)
        grid_rows = [r for r in rep.rows if r[0] == "grid"]
        window_rows = [r for r in rep.rows if r[0] == "window"]
        assert len(grid_rows) == 7 and len(window_rows) == 2
        assert grid_rows[0][2] == 1024 and grid_rows[-1][2] == 65536

    def test_same_start_pairs_meet_after_time_zero(self, mc_table64):
        win = EncounterWindows(growth="scaled", b0=1, g=64, k_max=1)
        rep = exp_encounters((1, 0), (1, 0), win, _cfg(1200, seed=13), table=mc_table64)
        frac = next(r for r in rep.rows if r[0] == "window")[7]
        assert 0.0 < frac <= 1.0

    def test_opposite_parity_is_rejected(self, mc_table64):
        win = EncounterWindows()
        with pytest.raises(DomainError):
            exp_encounters((1, 0), (1, 1), win, _cfg(10), table=mc_table64)
        with pytest.raises(DomainError):
            exp_encounters((0, 0), (2, 0), win, _cfg(10), table=mc_table64)

    def test_paper_windows_run_within_reach(self, mc_table64):
        win = EncounterWindows(growth="paper", k_max=2)
        rep = exp_encounters((1, 0), (-1, 0), win, _cfg(800, seed=21), table=mc_table64)
        window_rows = [r for r in rep.rows if r[0] == "window"]
        assert [(r[2], r[3]) for r in window_rows] == [(2, 20), (20, 8103)]


# ---------------------------------------------------------------------------
# recurrence contrast

class TestSrwRecurrenceExperiment:
    def test_default_windows_pass_and_conditioned_decays(self, mc_table64):
        win = EncounterWindows(growth="scaled", b0=1, g=4, k_max=3)
        rep = exp_srw_recurrence(win, _cfg(4000, seed=9), table=mc_table64)
        assert rep.passed
        srw = [r[3] for r in rep.rows]
        cond = [r[5] for r in rep.rows]
        assert min(srw) >= 0.2
        assert cond[-1] < cond[0]  # conditioned walk stops revisiting its start
        assert cond[-1] < srw[-1]

    def test_single_long_window_mostly_returns(self, mc_table64):
        # two in three simple walks revisit the origin within a thousand steps
        win = EncounterWindows(growth="scaled", b0=1, g=1000, k_max=1)
        rep = exp_srw_recurrence(win, _cfg(2000, seed=14), table=mc_table64)
        assert rep.rows[0][3] > 0.5

    def test_worker_invariance(self, mc_table64):
        win = EncounterWindows(growth="scaled", b0=1, g=4, k_max=2)
        a = exp_srw_recurrence(win, _cfg(3000, seed=4, workers=1), table=mc_table64)
        b = exp_srw_recurrence(win, _cfg(3000, seed=4, workers=3), table=mc_table64)
        assert a.rows == b.rows


# ---------------------------------------------------------------------------
# confinement tail

class TestConfinementExperiment:
    def test_decay_gates_pass(self, mc_table64):
        grid = [400 * k for k in (1, 2, 3)]
        rep = exp_confinement_tail(20, grid, _cfg(30_000, seed=10), table=mc_table64)
        assert rep.passed and not rep.inconclusive
        assert rep.config["slope"] < 0
        assert rep.config["r_squared"] >= 0.9
        p_hats = [r[3] for r in rep.rows]
        assert all(a >= b for a, b in zip(p_hats, p_hats[1:]))

    def test_slopes_agree_across_radii(self, mc_table64):
        # the decay rate lives on the t/r^2 clock, so doubling the radius
        # must leave the fitted slope within a factor of two
        rep20 = exp_confinement_tail(
            20, [400, 800, 1200], _cfg(30_000, seed=10), table=mc_table64
        )
        rep40 = exp_confinement_tail(
            40, [1600, 3200, 4800], _cfg(30_000, seed=12), table=mc_table64
        )
        assert rep20.passed and rep40.passed
        ratio = rep20.config["slope"] / rep40.config["slope"]
        assert 0.5 <= ratio <= 2.0

    def test_starved_tail_is_inconclusive_not_failed(self, mc_table64):
        rep = exp_confinement_tail(
            50, [2500 * k for k in (1, 2, 3, 4)], _cfg(400, seed=1), table=mc_table64
        )
        assert rep.inconclusive and not rep.passed
        assert rep.gates == [] and rep.config["slope"] is None

    def test_domain_errors(self, mc_table64):
        cfg = _cfg(10)
        with pytest.raises(DomainError):
            exp_confinement_tail(10, [100], cfg, table=mc_table64)  # r below range
        with pytest.raises(DomainError):
            exp_confinement_tail(20, [401], cfg, table=mc_table64)  # not k * r^2
        with pytest.raises(DomainError):
            exp_confinement_tail(20, [800, 400], cfg, table=mc_table64)
        with pytest.raises(DomainError):
            exp_confinement_tail(20, [], cfg, table=mc_table64)
