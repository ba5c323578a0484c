"""Estimator harness: exact merging, scoring against brackets, worker
invariance, and the standard closed-form suite wiring.

Statistical gates in this file are 4 to 5 sigma at small trial counts;
the tight-tolerance comparisons live in the acceptance suite.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condwalk import montecarlo as mc
from condwalk.errors import ConfigError, DomainError
from condwalk.montecarlo import (
    REPORT_HEADER,
    ComparisonReport,
    Estimate,
    EstimatorConfig,
    merge,
)
from condwalk.rng import Stream
from condwalk.theory import BracketedValue


def _cfg(trials=20000, seed=7, workers=1, radius=48.0, horizon=10**7):
    return EstimatorConfig(
        trials=trials,
        master_seed=seed,
        horizon=horizon,
        truncation_radius=radius,
        workers=workers,
    )


# ---------------------------------------------------------------------------
# configuration and estimate arithmetic

def test_config_validation():
    _cfg()  # the happy path constructs
    with pytest.raises(ConfigError):
        EstimatorConfig(trials=0)
    with pytest.raises(ConfigError):
        EstimatorConfig(trials=10, master_seed=-1)
    with pytest.raises(ConfigError):
        EstimatorConfig(trials=10, master_seed=2**64)
    with pytest.raises(ConfigError):
        EstimatorConfig(trials=10, horizon=0)
    with pytest.raises(ConfigError):
        EstimatorConfig(trials=10, truncation_radius=0.0)
    with pytest.raises(ConfigError):
        EstimatorConfig(trials=10, workers=0)


def test_event_estimate_statistics():
    e = Estimate.from_events(10000, 2500)
    assert e.mean == 0.25
    assert e.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 10000), rel=1e-12)
    assert e.ci95_lo < 0.25 < e.ci95_hi
    assert e.exhausted_fraction == 0.0

    # a single trial carries half a unit of uncertainty, not zero
    one = Estimate.from_events(1, 1)
    assert one.stderr == 0.5

    # few successes: Wilson interval, nonzero width even at zero successes
    rare = Estimate.from_events(10000, 0)
    assert rare.mean == 0.0
    assert rare.ci95_lo == 0.0
    assert 0.0 < rare.ci95_hi < 1e-3
    with pytest.raises(ConfigError):
        Estimate.from_events(10, 11)


def test_sum_estimate_statistics():
    # values 0,1,2,3 once each: mean 1.5, sample variance 5/3
    e = Estimate.from_sums(4, 6, 14)
    assert e.mean == 1.5
    assert e.stderr == pytest.approx(math.sqrt((5.0 / 3.0) / 4.0), rel=1e-12)
    single = Estimate.from_sums(1, 7, 49)
    assert single.mean == 7.0
    assert single.stderr == math.inf


@settings(max_examples=60, deadline=None)
@given(
    parts=st.lists(
        st.tuples(st.integers(1, 40), st.integers(0, 40)).map(
            lambda t: (t[0], min(t[1], t[0]))
        ),
        min_size=2,
        max_size=6,
    )
)
def test_merge_matches_pooled_counts(parts):
    ests = [Estimate.from_events(n, k) for n, k in parts]
    folded = ests[0]
    for e in ests[1:]:
        folded = merge(folded, e)
    pooled = Estimate.from_events(sum(n for n, _ in parts), sum(k for _, k in parts))
    assert folded == pooled


def test_merge_rejects_mixed_kinds():
    with pytest.raises(ConfigError):
        merge(Estimate.from_events(10, 3), Estimate.from_sums(10, 3, 9))


# ---------------------------------------------------------------------------
# scoring

def test_z_score_zero_on_overlap_and_gap_otherwise():
    est = Estimate.from_events(10000, 5000)  # mean .5, stderr .005
    exact_in = BracketedValue.point(0.501)
    r = mc._compare("c", est, exact_in, widen=0.0)
    assert r.z_score == 0.0

    exact_out = BracketedValue.point(0.6)
    r2 = mc._compare("c", est, exact_out, widen=0.0)
    gap = 0.6 - est.ci95_hi
    assert r2.z_score == pytest.approx(gap / est.stderr, rel=1e-12)

    # widening by the truncation bound absorbs the same gap
    r3 = mc._compare("c", est, exact_out, widen=0.2)
    assert r3.z_score == 0.0
    assert r3.truncation_bound == 0.2


def test_horizon_warning_threshold():
    quiet = ComparisonReport(
        "q", Estimate.from_events(10000, 5, exhausted=10),
        BracketedValue.point(0.0), 0.0, 0.0,
    )
    loud = ComparisonReport(
        "l", Estimate.from_events(10000, 5, exhausted=11),
        BracketedValue.point(0.0), 0.0, 0.0,
    )
    assert not quiet.horizon_warning
    assert loud.horizon_warning


# ---------------------------------------------------------------------------
# the generic event backbone

def _coin_chunk(master_seed, lo, hi):
    # first uniform of stream i below 1/4: dyadic, so the probability is
    # exactly 0.25 on the 53-bit grid
    vals = np.array(
        [1 if Stream(master_seed, i).next_uniform() < 0.25 else 0 for i in range(lo, hi)],
        dtype=np.int64,
    )
    return vals, 0


def test_estimate_event_backbone():
    cfg = _cfg(trials=10000, seed=3)
    est = mc.estimate_event(_coin_chunk, cfg, resolves_within_horizon=True)
    assert est.n_trials == 10000
    assert abs(est.mean - 0.25) < 5.0 * est.stderr
    with pytest.raises(ConfigError):
        mc.estimate_event(_coin_chunk, cfg)  # undecidable without a bound
    est2 = mc.estimate_event(_coin_chunk, cfg, truncation_bound=0.01)
    assert est2 == est


def test_estimate_event_worker_invariance():
    est1 = mc.estimate_event(
        _coin_chunk, _cfg(trials=9000, seed=5, workers=1), resolves_within_horizon=True
    )
    est4 = mc.estimate_event(
        _coin_chunk, _cfg(trials=9000, seed=5, workers=4), resolves_within_horizon=True
    )
    assert est1 == est4


# ---------------------------------------------------------------------------
# concrete estimators against the small table

def test_return_prob_estimator(mc_table64):
    r = mc.estimate_return_prob((1, 0), _cfg(), mc_table64)
    assert r.exact.value == 0.5
    assert r.z_score == 0.0
    # truncated estimate sits below the exact value, within the bound
    assert 0.5 - r.truncation_bound - 5 * r.estimate.stderr < r.estimate.mean < 0.5
    with pytest.raises(ConfigError):
        mc.estimate_return_prob((10, 0), _cfg(radius=48.0), mc_table64)


def test_hit_and_green_estimators(mc_table64):
    h = mc.estimate_hit_prob((1, 0), (-1, 0), _cfg(), mc_table64)
    assert h.z_score == 0.0
    assert h.estimate.mean < h.exact.value  # truncation only loses hits

    g = mc.estimate_green((1, 0), (1, 0), _cfg(), mc_table64)
    assert g.exact.value == pytest.approx(2.0, rel=1e-12)
    assert g.exact.sys_hi == pytest.approx(2.0 + g.truncation_bound, rel=1e-9)
    assert g.z_score == 0.0
    assert g.estimate.sum is not None and g.estimate.successes is None


def test_escape_annulus_srw_estimators(mc_table64):
    e = mc.estimate_escape_prob((4, 0), 2, _cfg(), mc_table64)
    assert e.z_score == 0.0

    a = mc.estimate_annulus_escape((16, 0), 4, 40, _cfg(), mc_table64)
    assert a.truncation_bound == 0.0  # resolves exactly, no exhaustion here
    assert a.z_score == 0.0

    s = mc.estimate_srw_exit((5, 0), (0, 0), 40, _cfg(), mc_table64)
    assert s.truncation_bound == 0.0
    assert s.z_score == 0.0
    # the sampler only understands origin-centred disks
    with pytest.raises(DomainError):
        mc.estimate_srw_exit((5, 0), (1, 0), 40, _cfg(), mc_table64)


def test_estimator_worker_invariance(mc_table64):
    r1 = mc.estimate_return_prob((1, 0), _cfg(workers=1), mc_table64)
    r3 = mc.estimate_return_prob((1, 0), _cfg(workers=3), mc_table64)
    assert r1 == r3


# ---------------------------------------------------------------------------
# the standard suite and CSV output

def test_standard_suite_wiring(mc_table64):
    cfg = _cfg(trials=30, seed=11, radius=10**4, horizon=10**8)
    reports = mc.standard_suite(cfg, mc_table64)
    assert [r.case for r in reports] == list(mc.STANDARD_CASES)
    for r in reports:
        assert r.estimate.n_trials == 30
        assert math.isfinite(r.z_score)

    # a subset run reproduces exactly the rows of the full run
    subset = mc.standard_suite(cfg, mc_table64, cases=("hit_far_200", "green_3_4"))
    by_case = {r.case: r for r in reports}
    assert subset[0] == by_case["hit_far_200"]
    assert subset[1] == by_case["green_3_4"]

    with pytest.raises(ConfigError):
        mc.standard_suite(cfg, mc_table64, cases=("no_such_case",))


def test_reports_csv_round_trip(tmp_path, mc_table64):
    cfg = _cfg(trials=2000, seed=13)
    reports = [
        mc.estimate_return_prob((1, 0), cfg, mc_table64),
        mc.estimate_srw_exit((5, 0), (0, 0), 40, cfg, mc_table64),
    ]
    out = tmp_path / "suite.csv"
    mc.write_reports_csv(reports, out)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == REPORT_HEADER
    assert len(lines) == 3
    for line, rep in zip(lines[1:], reports):
        fields = line.split(",")
        assert fields[0] == rep.case
        # 17 significant digits round-trip float64 exactly
        assert float(fields[1]) == rep.estimate.mean
        assert float(fields[2]) == rep.estimate.stderr
        assert float(fields[8]) == rep.truncation_bound
        assert float(fields[9]) == rep.z_score
        # z is recomputable from the row alone
        lo = float(fields[3]) - float(fields[8])
        hi = float(fields[4]) + float(fields[8])
        if float(fields[7]) >= lo and float(fields[6]) <= hi:
            assert float(fields[9]) == 0.0
