"""Compiled sampling kernels: exactness of block tables, bit-equality with
the reference walk, determinism under chunking, and agreement between the
block-jump route and the plain single-step route.

The single-step route exists precisely so its distribution can be compared
against the block route; the two share only the potential table, never the
jump machinery.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from condwalk import walk
from condwalk.engine import (
    EXHAUSTED,
    HIT,
    KMAX,
    KMIN,
    MISSED,
    _init,
    _uni,
    block_sizes,
    build_block_tables,
)
from condwalk.rng import Stream
from condwalk.walk import WalkKind


# ---------------------------------------------------------------------------
# RNG mirrors

def test_compiled_stream_matches_reference():
    for seed in (0, 1, 2**64 - 1, 0x1234_5678_9ABC_DEF0):
        for sid in (0, 7, 10**6):
            ref = Stream(seed, sid)
            state = _init(np.uint64(seed), np.uint64(sid))
            for _ in range(64):
                state, u = _uni(state)
                assert u == ref.next_uniform()


# ---------------------------------------------------------------------------
# block size ladder and alias tables

def test_block_sizes_ladder():
    ks = block_sizes()
    assert ks[0] == KMIN
    assert ks[-1] <= KMAX < math.ceil(ks[-1] * 1.25)
    assert np.all(np.diff(ks) > 0)
    # geometric-ish spacing: never more than the design ratio apart
    assert np.all(ks[1:] <= np.ceil(ks[:-1] * 1.25))


def _reconstruct_pmf(prob, alias, off, size):
    """Invert an alias table back into the pmf it samples.

    Cell i returns i with probability prob[i] and alias[i] otherwise, and
    the cell itself is uniform, so pmf[v] collects prob[v] plus every
    redirection into v.
    """
    pmf = np.zeros(size)
    for i in range(size):
        pmf[i] += prob[off + i]
        pmf[alias[off + i]] += 1.0 - prob[off + i]
    return pmf / size


def test_alias_tables_reproduce_exact_binomials(table64):
    bt = build_block_tables(table64)
    ks = np.asarray(bt.ks)
    offs = np.asarray(bt.offs)
    for j, k in enumerate(ks):
        size = int(k) + 1
        off = int(offs[j])
        assert np.all(bt.prob[off : off + size] >= 0.0)
        assert np.all(bt.prob[off : off + size] <= 1.0 + 1e-12)
        assert np.all(bt.alias[off : off + size] >= 0)
        assert np.all(bt.alias[off : off + size] < size)
        pmf = _reconstruct_pmf(bt.prob, bt.alias, off, size)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
        if k <= 1100:
            idx = range(size)
        else:
            c = size // 2
            idx = sorted(
                set(
                    list(range(6))
                    + list(range(size - 6, size))
                    + [c - 2, c - 1, c, c + 1, c + 2, size // 4, 3 * size // 4]
                )
            )
        for i in idx:
            exact = float(Fraction(math.comb(int(k), i), 2 ** int(k)))
            # the construction rounds twice (pmf entry, then Vose bucket
            # arithmetic); budget a few ulps of the cell count
            assert pmf[i] == pytest.approx(exact, abs=5e-16 * size)


# ---------------------------------------------------------------------------
# pathwise equality with the pure-python walk

def test_path_kernel_bitwise_matches_sample_path(table64, kernels64):
    for kind, srw in ((WalkKind.SRW, True), (WalkKind.CONDITIONED, False)):
        for seed, sid, start in ((3, 0, (1, 0)), (11, 5, (2, -3)), (12345, 2, (-4, 4))):
            got = kernels64.path(seed, sid, srw, start[0], start[1],2000)
            ref = walk.sample_path(kind, start, 2000, Stream(seed, sid), table=table64)
            assert np.array_equal(got, ref.positions)


# ---------------------------------------------------------------------------
# chunk determinism

def test_event_chunk_split_is_invisible(kernels64):
    args = (False, 1, 0, True, 1, 0, False, False, 0, 0, 48 * 48, 48, False, 10**6)
    whole = kernels64.event_chunk(9, 0, 256, *args)
    first = kernels64.event_chunk(9, 0, 100, *args)
    second = kernels64.event_chunk(9, 100, 256, *args)
    for w, f, s in zip(whole, first, second):
        assert np.array_equal(w, np.concatenate([f, s]))


# ---------------------------------------------------------------------------
# outcome coding, horizon, visit counting

def test_event_outcomes_and_horizon(kernels64):
    # with a 10-step horizon inside B(48) nothing can be MISSED
    out, visits, steps = kernels64.event_chunk(
        5, 0, 512, False, 1, 0, True, 1, 0, False, False, 0, 0, 48 * 48, 48, False, 10
    )
    assert set(np.unique(out)).issubset({HIT, EXHAUSTED})
    assert np.all(steps <= 10)
    assert np.any(out == EXHAUSTED)
    assert np.all(visits == 0)  # count_visits off


def test_visit_counting_counts_time_zero(kernels64):
    out, visits, _ = kernels64.event_chunk(
        5, 0, 256, False, 1, 0, True, 1, 0, True, False, 0, 0, 48 * 48, 48, False, 10**6
    )
    # starting on the target is a visit at time zero
    assert np.all(visits >= 1)
    assert visits.mean() > 1.2  # returns add more on top


# ---------------------------------------------------------------------------
# block route vs single-step route (dual route, shared table only)

def _two_sample_z(k1, n1, k2, n2):
    p1, p2 = k1 / n1, k2 / n2
    se = math.sqrt(p1 * (1 - p1) / n1 + p2 * (1 - p2) / n2)
    return abs(p1 - p2) / se if se > 0 else 0.0


@pytest.mark.parametrize(
    "case",
    [
        # (srw, start, target?, inner?, outer, outer_exact)
        ("return", False, (1, 0), (1, 0), None, 48.0, False),
        ("srw_exit", True, (5, 0), (0, 0), None, 40.0, True),
        ("annulus", False, (16, 0), None, 4.0, 40.0, True),
    ],
)
def test_blocks_agree_with_singles(kernels64, kernels64_singles, case):
    name, srw, start, target, inner, outer, outer_exact = case
    has_point = target is not None
    t1, t2 = target if has_point else (0, 0)
    has_inner = inner is not None
    rin_sq = int(inner * inner) if has_inner else 0
    ri_ceil = int(math.ceil(inner)) if has_inner else 0
    rout_sq = int(outer * outer)
    ro_floor = int(outer)
    counts = []
    n = 20000
    for kn, seed in ((kernels64, 101), (kernels64_singles, 202)):
        out, _, _ = kn.event_chunk(
            seed, 0, n, srw, start[0], start[1], has_point, t1, t2,
            False, has_inner, rin_sq, ri_ceil, rout_sq, ro_floor,
            outer_exact, 10**7,
        )
        assert not np.any(out == EXHAUSTED)
        code = HIT if has_point and not outer_exact else MISSED
        counts.append(int((out == code).sum()))
    z = _two_sample_z(counts[0], n, counts[1], n)
    assert z < 4.0, f"{name}: routes disagree, z={z:.2f}"


def test_blocks_agree_with_singles_green_visits(kernels64, kernels64_singles):
    n = 20000
    means = []
    varis = []
    for kn, seed in ((kernels64, 303), (kernels64_singles, 404)):
        _, visits, _ = kn.event_chunk(
            seed, 0, n, False, 1, 0, True, 1, 0, True,
            False, 0, 0, 48 * 48, 48, False, 10**7,
        )
        means.append(visits.mean())
        varis.append(visits.var(ddof=1) / n)
    z = abs(means[0] - means[1]) / math.sqrt(varis[0] + varis[1])
    assert z < 4.0, f"green visit means disagree, z={z:.2f}"


# ---------------------------------------------------------------------------
# windowed visit and pair kernels

def _window_flags_from_path(positions, target, bnd):
    """Oracle bitmask: visits to target per half-open window [bnd+w, bnd+w+1)."""
    flags = 0
    hits = np.nonzero(
        (positions[:, 0] == target[0]) & (positions[:, 1] == target[1])
    )[0]
    for t in hits:
        for w in range(len(bnd) - 1):
            if bnd[w] <= t < bnd[w + 1]:
                flags |= 1 << w
    return flags


@pytest.mark.parametrize("srw,start,target", [
    (True, (0, 0), (0, 0)),
    (False, (1, 0), (1, 0)),
    (False, (2, 1), (1, 0)),
])
def test_visit_windows_match_path_scan(kernels64_singles, srw, start, target):
    """The single-step route must reproduce an explicit path scan exactly,
    including visits landing exactly on window boundaries."""
    bnd = np.asarray([1, 8, 64, 512], dtype=np.int64)
    n = 200
    out = np.zeros(n, dtype=np.int64)
    kernels64_singles.visit_window_chunk(
        77, 0, n, srw, start[0], start[1], target[0], target[1], bnd, out
    )
    boundary_visits = 0
    for i in range(n):
        pos = kernels64_singles.path(77, i, srw, start[0], start[1], int(bnd[-1]))
        want = _window_flags_from_path(pos, target, bnd)
        assert int(out[i]) == want, f"trial {i}"
        at_bounds = (pos[bnd[1]] == target).all() or (pos[bnd[2]] == target).all()
        boundary_visits += int(at_bounds)
    if srw:
        # the scan only proves boundary attribution if boundaries get hit
        assert boundary_visits > 0


def test_visit_windows_blocks_agree_with_singles(kernels64, kernels64_singles):
    bnd = np.asarray([1, 4, 16, 64, 256, 1024], dtype=np.int64)
    n = 8000
    fracs = []
    for kn, seed in ((kernels64, 31), (kernels64_singles, 32)):
        out = np.zeros(n, dtype=np.int64)
        kn.visit_window_chunk(seed, 0, n, False, 1, 0, 1, 0, bnd, out)
        fracs.append([int(((out >> w) & 1).sum()) for w in range(len(bnd) - 1)])
    for w, (k1, k2) in enumerate(zip(*fracs)):
        z = _two_sample_z(k1, n, k2, n)
        assert z < 4.0, f"window {w}: routes disagree, z={z:.2f}"


def _run_pairs(kn, seed, n, a, b, grid_lo, grid_hi, win_lo, win_hi, swap=False):
    bnd = np.unique(np.concatenate([grid_lo, grid_hi, win_lo, win_hi]))
    horizon = int(max(grid_hi[-1], win_hi[-1]))
    counts = np.zeros((n, len(grid_lo)), dtype=np.int64)
    flags = np.zeros(n, dtype=np.int64)
    kn.pair_chunk(
        seed, 0, n, a[0], a[1], b[0], b[1], grid_lo, grid_hi,
        win_lo, win_hi, bnd, horizon, swap, counts, flags,
    )
    return counts, flags


def test_pair_kernel_singles_match_two_path_scan(kernels64_singles):
    """Pair trial i must equal an explicit scan of its two component paths
    (streams 2i and 2i + 1), meeting by meeting."""
    grid_lo = np.asarray([64, 128], dtype=np.int64)
    grid_hi = grid_lo + grid_lo // 8
    win_lo = np.asarray([1, 16], dtype=np.int64)
    win_hi = np.asarray([16, 256], dtype=np.int64)
    n = 150
    counts, flags = _run_pairs(
        kernels64_singles, 909, n, (1, 0), (-1, 0), grid_lo, grid_hi, win_lo, win_hi
    )
    horizon = 256
    met_total = 0
    for i in range(n):
        pa = kernels64_singles.path(909, 2 * i, False, 1, 0, horizon)
        pb = kernels64_singles.path(909, 2 * i + 1, False, -1, 0, horizon)
        meet = np.nonzero((pa[:, 0] == pb[:, 0]) & (pa[:, 1] == pb[:, 1]))[0]
        meet = meet[meet >= 1]
        met_total += meet.size
        for g in range(len(grid_lo)):
            want = int(((meet >= grid_lo[g]) & (meet < grid_hi[g])).sum())
            assert int(counts[i, g]) == want
        want_flags = 0
        for w in range(len(win_lo)):
            if np.any((meet >= win_lo[w]) & (meet < win_hi[w])):
                want_flags |= 1 << w
        assert int(flags[i]) == want_flags
    assert met_total > 0  # the scan has to have seen actual meetings


def test_pair_kernel_swap_relabels_streams_exactly(kernels64):
    grid_lo = np.asarray([256, 1024], dtype=np.int64)
    grid_hi = grid_lo + grid_lo // 8
    win_lo = np.asarray([1, 64], dtype=np.int64)
    win_hi = np.asarray([64, 2048], dtype=np.int64)
    base = _run_pairs(
        kernels64, 515, 600, (1, 0), (-1, 0), grid_lo, grid_hi, win_lo, win_hi
    )
    swapped = _run_pairs(
        kernels64, 515, 600, (-1, 0), (1, 0), grid_lo, grid_hi, win_lo, win_hi,
        swap=True,
    )
    assert np.array_equal(base[0], swapped[0])
    assert np.array_equal(base[1], swapped[1])


def test_pair_kernel_blocks_agree_with_singles(kernels64, kernels64_singles):
    grid_lo = np.asarray([64, 512], dtype=np.int64)
    grid_hi = grid_lo + grid_lo // 8
    win_lo = np.asarray([1, 32], dtype=np.int64)
    win_hi = np.asarray([32, 1024], dtype=np.int64)
    n = 4000
    stats = []
    for kn, seed in ((kernels64, 61), (kernels64_singles, 62)):
        counts, flags = _run_pairs(
            kn, seed, n, (1, 0), (-1, 0), grid_lo, grid_hi, win_lo, win_hi
        )
        stats.append((counts, flags))
    for w in range(len(win_lo)):
        k1 = int(((stats[0][1] >> w) & 1).sum())
        k2 = int(((stats[1][1] >> w) & 1).sum())
        z = _two_sample_z(k1, n, k2, n)
        assert z < 4.0, f"window {w}: routes disagree, z={z:.2f}"
    for g in range(len(grid_lo)):
        m1, m2 = stats[0][0][:, g].mean(), stats[1][0][:, g].mean()
        v1 = stats[0][0][:, g].var(ddof=1) / n
        v2 = stats[1][0][:, g].var(ddof=1) / n
        z = abs(m1 - m2) / math.sqrt(v1 + v2) if v1 + v2 > 0 else 0.0
        assert z < 4.0, f"grid {g}: meeting rates disagree, z={z:.2f}"
