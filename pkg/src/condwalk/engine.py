"""Compiled Monte Carlo kernels with exact multi-step block jumps.

The conditioned kernel factorizes over whole blocks far from the origin:
if k < |z| then no k-step path from z can touch the origin, so the k-step
transition law is exactly a(z+d)/a(z) * P_k(d) with P_k the free-walk
k-step law.  In the rotated coordinates u = x1+x2, v = x1-x2 the free walk
splits into two independent +-1 walks, so d is sampled from two
Binomial(k, 1/2) draws via alias tables, and the a-ratio is applied by
rejection against an upper envelope of a over the reachable disk.  Since
any k-step displacement satisfies |d| <= k in the Euclidean norm, capping
k below the distance to the origin, to a target point, or to a stopping
boundary guarantees the block can neither touch nor overshoot it, and the
kernels fall back to single steps (mirroring walk._step bit for bit) when
the caps drop below the smallest block size.

The envelope is computed from integers only: sup = 2*(rr + k*k) dominates
(|z| + k)^2 >= |w|^2 for every reachable w by AM-GM, and the log of sup is
cached per trial over a factor-two band so the per-block cost is a few
integer ops plus the rejection test.  Block admissibility is also integer
only: each cap "k <= isqrt(q) - c" is tested as a precomputed square
against q, so the hot loops contain no square roots or divisions at all.
The rejection test itself avoids the far-field log on most draws through
the squeeze t + t^2/2 <= -log(1-t) <= t + t^2/(2(1-t)); the 1e-9 margins
make both shortcuts conservative, and draws falling between the bounds
fall through to the exact comparison.

The hot functions are built by a factory that closes over the alias and
potential arrays.  Passing arrays as arguments between jitted functions
costs tens of nanoseconds per call in reference-count traffic, which
dwarfs the arithmetic here; closure capture makes every inner call
scalar-only and lets LLVM flatten the block loop.  The price is that the
kernels are compiled once per process instead of being loaded from the
on-disk cache.

Everything here is deterministic given (master_seed, stream_id): trial i
always consumes stream i regardless of how trials are chunked, so results
are independent of worker count by construction.
"""

from __future__ import annotations

import math
from typing import Any, NamedTuple

import numpy as np
from numba import njit
from scipy.stats import binom

from .potential import KAPPA, PotentialTable, default_table
from .rng import GAMMA, _MIX1, _MIX2

_INV_PI = 1.0 / math.pi
_U53 = 1.0 / 9007199254740992.0

# uint64 constants; numba promotes uint64-with-int arithmetic to float64,
# so every literal the RNG touches must already be a uint64.
_G = np.uint64(GAMMA)
_M1 = np.uint64(_MIX1)
_M2 = np.uint64(_MIX2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_U1 = np.uint64(1)

# Smallest block size; below this limit the kernels take single steps.
KMIN = 16
# Largest block size; caps alias table memory.
KMAX = 16384

# Trial outcome codes shared with the montecarlo layer.
HIT = 1  # reached the target point / entered the inner disk
MISSED = 0  # crossed the outer radius first
EXHAUSTED = 2  # ran out of steps with the event undecided


class BlockTables(NamedTuple):
    """Alias tables for Binomial(k, 1/2) draws plus the potential grid."""

    ks: np.ndarray  # block sizes, ascending int64
    offs: np.ndarray  # start of each k's alias rows in prob/alias
    prob: np.ndarray  # alias acceptance probabilities, float64
    alias: np.ndarray  # alias redirect indices, int32
    grid: np.ndarray  # dense quadrant of potential values
    r2: int  # exact_radius**2 of the grid
    excess: float  # sup of a(x) - asymptote(|x|), for the envelope


def _vose(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias decomposition of a probability vector."""
    n = p.size
    scaled = p * n
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.int32)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        (small if scaled[l] < 1.0 else large).append(l)
    # leftovers are 1 up to rounding
    return prob, alias


def block_sizes(kmin: int = KMIN, kmax: int = KMAX, ratio: float = 1.25) -> np.ndarray:
    ks = []
    k = kmin
    while k <= kmax:
        ks.append(k)
        k = max(k + 1, int(math.ceil(k * ratio)))
    return np.asarray(ks, dtype=np.int64)


def build_block_tables(table: PotentialTable) -> BlockTables:
    ks = block_sizes()
    offs = np.zeros(ks.size, dtype=np.int64)
    probs = []
    aliases = []
    total = 0
    for i, k in enumerate(ks):
        offs[i] = total
        pmf = binom.pmf(np.arange(k + 1), int(k), 0.5)
        pmf = pmf / pmf.sum()
        pr, al = _vose(pmf)
        probs.append(pr)
        aliases.append(al)
        total += k + 1
    r = table.exact_radius
    return BlockTables(
        ks=ks,
        offs=offs,
        prob=np.concatenate(probs),
        alias=np.concatenate(aliases),
        grid=np.ascontiguousarray(table.grid, dtype=np.float64),
        r2=r * r,
        excess=table.excess_over_asymptote,
    )


# --- scalar helpers -----------------------------------------------------------
#
# _mix/_init/_uni must stay bit-identical to rng.sm64_mix/sm64_init/
# sm64_uniform.  Tests pin the equivalence.  The kernel factory redefines
# them as closures: functions compiled with cache=True are loaded as
# opaque object code that LLVM cannot inline into the trial loops, and an
# un-inlined call costs more than the whole block body.


# explicit signatures: a Python int flowing back in must be coerced to
# uint64, not dispatched to a fresh signed specialization
@njit("uint64(uint64)", cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit("uint64(uint64, uint64)", cache=True, nogil=True)
def _init(master_seed, stream_id):
    z = master_seed + _G * (stream_id + _U1)
    return _mix(_mix(z) ^ _G)


@njit("Tuple((uint64, float64))(uint64)", cache=True, nogil=True)
def _uni(state):
    state = state + _G
    w = _mix(state)
    return state, (w >> _S11) * _U53


class Kernels(NamedTuple):
    """Compiled chunk drivers bound to one set of block tables.

    Every driver takes (seed, id_lo, id_hi, ...) and runs trials id_lo to
    id_hi - 1, drawing trial i from RNG stream i (pairs use 2i, 2i + 1).
    """

    tables: BlockTables
    event_chunk: Any
    endpoint_chunk: Any
    minimum_chunk: Any
    pair_chunk: Any
    confine_chunk: Any
    visit_window_chunk: Any
    path: Any


def build_kernels(
    table: PotentialTable | None = None, use_blocks: bool = True
) -> Kernels:
    """Compile the kernel set over a potential table.

    use_blocks=False compiles a singles-only twin (every jump is one
    lattice step); it exists so tests can compare the block machinery
    against plain stepping on the same events with the same stream layout.
    """
    if table is None:
        table = default_table()
    bt = build_block_tables(table)
    ks = bt.ks
    offs = bt.offs
    prob = bt.prob
    alias = bt.alias
    grid = bt.grid
    r2 = bt.r2
    excess = bt.excess
    nk = ks.shape[0] if use_blocks else 0
    j0 = 0 if use_blocks else -1
    # k is admissible at rr iff (k+1)^2 <= rr, i.e. k <= isqrt(rr) - 1;
    # rmin turns every origin/target cap into one integer comparison.
    # pmin is the pair version: 2k <= isqrt(dd) - 1 iff (2k+1)^2 <= dd.
    rmin = (ks + 1) ** 2
    pmin = (2 * ks + 1) ** 2

    @njit(nogil=True, inline="always")
    def init(master_seed, stream_id):
        # mirrors rng.sm64_init / _init bit for bit
        z = master_seed + _G * (stream_id + _U1)
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        z = (z ^ (z >> _S31)) ^ _G
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)

    @njit(nogil=True, inline="always")
    def uni(state):
        # mirrors rng.sm64_uniform / _uni bit for bit
        state = state + _G
        z = (state ^ (state >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        z = z ^ (z >> _S31)
        return state, (z >> _S11) * _U53

    @njit(nogil=True, inline="always")
    def isqrt(rr):
        # floor sqrt of a nonnegative int64; the float guess is within 1
        s = int(math.sqrt(rr * 1.0))
        if s * s > rr:
            s -= 1
        elif (s + 1) * (s + 1) <= rr:
            s += 1
        return s

    @njit(nogil=True, inline="always")
    def step_srw(x1, x2, u):
        if u < 0.25:
            return x1 + 1, x2
        if u < 0.5:
            return x1, x2 + 1
        if u < 0.75:
            return x1 - 1, x2
        return x1, x2 - 1

    @njit(nogil=True, inline="always")
    def aval(x1, x2):
        # mirrors walk._a_value bit for bit
        rr = x1 * x1 + x2 * x2
        if rr <= r2:
            return grid[abs(x1), abs(x2)]
        return _INV_PI * math.log(rr * 1.0) + KAPPA

    @njit(nogil=True, inline="always")
    def step_cond(x1, x2, u):
        # mirrors walk._step bit for bit
        d = 4.0 * aval(x1, x2)
        c = aval(x1 + 1, x2) / d
        if u < c:
            return x1 + 1, x2
        c += aval(x1, x2 + 1) / d
        if u < c:
            return x1, x2 + 1
        c += aval(x1 - 1, x2) / d
        if u < c:
            return x1 - 1, x2
        if x1 == 0 and x2 == 1:
            return x1 - 1, x2
        return x1, x2 - 1

    @njit(nogil=True, inline="always")
    def block_free(state, x1, x2, k, off):
        """One k-step displacement of the free walk (two binomial lanes)."""
        size = k + 1
        state, u = uni(state)
        f = u * size
        c1 = int(f)
        # select, not branch: the redirect coin is unpredictable by design
        b1 = alias[off + c1] if f - c1 >= prob[off + c1] else c1
        state, u = uni(state)
        f = u * size
        c2 = int(f)
        b2 = alias[off + c2] if f - c2 >= prob[off + c2] else c2
        du = 2 * b1 - k
        dv = 2 * b2 - k
        return state, x1 + (du + dv) // 2, x2 + (du - dv) // 2

    @njit(nogil=True, inline="always")
    def block_cond(state, x1, x2, k, off, rr, ahi_b, sup_b, inv_sb):
        """One k-step block of the conditioned walk, k < |(x1,x2)|.

        (ahi_b, sup_b, inv_sb) is the caller's per-trial envelope band:
        ahi_b bounds a(w) over every site with |w|^2 <= sup_b, and inv_sb
        is 1/sup_b.  sup = 2(rr + k^2) >= (|z| + k)^2 by AM-GM, so no
        square root is needed; the band refreshes with factor-two
        hysteresis and its log amortizes over many blocks.
        """
        sup = 2 * (rr + k * k)
        if sup > sup_b or 4 * sup < sup_b:
            sup_b = 2 * sup
            inv_sb = 1.0 / (sup_b * 1.0)
            ahi_b = _INV_PI * math.log(sup_b * 1.0) + KAPPA + excess + 1e-12
        while True:
            state, w1, w2 = block_free(state, x1, x2, k, off)
            state, ua = uni(state)
            g = ua * ahi_b
            rw = w1 * w1 + w2 * w2
            if rw > r2:
                # a(w) = ahi_b - excess - 1e-12 - log(sup_b/rw)/pi, squeezed
                # through t + t^2/2 <= -log(1-t) <= t + t^2/(2(1-t)) with
                # t = 1 - rw/sup_b; the fast tests are multiplication-only.
                t = (sup_b - rw) * inv_sb
                base = ahi_b - excess - 1e-12 - _INV_PI * (t + 0.5 * t * t)
                if (base - 1e-9 - g) * rw * inv_sb > _INV_PI * 0.5 * t * t * t:
                    return state, w1, w2, ahi_b, sup_b, inv_sb
                if g >= base + 1e-9:
                    continue
                aw = _INV_PI * math.log(rw * 1.0) + KAPPA
            else:
                aw = grid[abs(w1), abs(w2)]
            if g < aw:
                return state, w1, w2, ahi_b, sup_b, inv_sb

    @njit(nogil=True)
    def event_trial(
        state,
        srw,
        x1,
        x2,
        has_point,
        t1,
        t2,
        count_visits,
        has_inner,
        rin_sq,
        rout_sq,
        outer_exact,
        horizon,
        imin,
        omax,
    ):
        """Run one trial until the event resolves; see event_chunk.

        imin[j] / omax[j] are the precomputed admissibility squares for
        the inner-disk and exact-outer caps: block j is allowed iff
        imin[j] <= rr and rr < omax[j] (when the respective cap applies).
        """
        j = j0
        t = 0
        visits = 0
        ahi_b = 0.0
        sup_b = 0
        inv_sb = 0.0
        if count_visits and x1 == t1 and x2 == t2:
            visits = 1
        point_off_origin = has_point and not (t1 == 0 and t2 == 0)
        while t < horizon:
            rr = x1 * x1 + x2 * x2
            if rr > rout_sq:
                return state, MISSED, visits, t
            if has_inner and rr <= rin_sq:
                return state, HIT, visits, t
            cap = rr  # origin avoidance; also the cap for a target at 0
            if point_off_origin:
                dd = (x1 - t1) * (x1 - t1) + (x2 - t2) * (x2 - t2)
                if dd < cap:
                    cap = dd
            rem = horizon - t
            while j >= 0 and not (
                rmin[j] <= cap
                and ks[j] <= rem
                and (not has_inner or imin[j] <= rr)
                and (not outer_exact or rr < omax[j])
            ):
                j -= 1
            while j + 1 < nk and (
                rmin[j + 1] <= cap
                and ks[j + 1] <= rem
                and (not has_inner or imin[j + 1] <= rr)
                and (not outer_exact or rr < omax[j + 1])
            ):
                j += 1
            if j >= 0:
                k = ks[j]
                if srw:
                    state, x1, x2 = block_free(state, x1, x2, k, offs[j])
                else:
                    state, x1, x2, ahi_b, sup_b, inv_sb = block_cond(
                        state, x1, x2, k, offs[j], rr, ahi_b, sup_b, inv_sb
                    )
                t += k
            else:
                state, u = uni(state)
                if srw:
                    x1, x2 = step_srw(x1, x2, u)
                else:
                    x1, x2 = step_cond(x1, x2, u)
                t += 1
                if has_point and x1 == t1 and x2 == t2:
                    if count_visits:
                        visits += 1
                    else:
                        return state, HIT, visits, t
        return state, EXHAUSTED, visits, horizon

    @njit(nogil=True)
    def event_chunk(
        seed,
        id_lo,
        id_hi,
        srw,
        x01,
        x02,
        has_point,
        t1,
        t2,
        count_visits,
        has_inner,
        rin_sq,
        ri_ceil,
        rout_sq,
        ro_floor,
        outer_exact,
        horizon,
    ):
        """Trials id_lo..id_hi-1 of a first-passage event.

        Outcome per trial: HIT if the target point was stepped on (or the
        inner disk entered), MISSED if the walk crossed rout first,
        EXHAUSTED if the horizon ran out.  visits counts target visits
        when count_visits is set (the trial then never ends in HIT).
        """
        n = id_hi - id_lo
        outcomes = np.empty(n, dtype=np.int8)
        visits = np.empty(n, dtype=np.int64)
        steps = np.empty(n, dtype=np.int64)
        # block j admissible: inner disk needs k <= isq - ri_ceil - 1,
        # i.e. (k + ri_ceil + 1)^2 <= rr; exact outer needs
        # k <= ro_floor - isq - 1, i.e. rr < (ro_floor - k)^2.
        imin = np.empty(nk, dtype=np.int64)
        omax = np.empty(nk, dtype=np.int64)
        for jj in range(nk):
            si = ks[jj] + ri_ceil + 1
            imin[jj] = si * si
            so = ro_floor - ks[jj]
            omax[jj] = so * so if so > 0 else 0
        su = np.uint64(seed)
        for i in range(n):
            state = init(su, np.uint64(id_lo + i))
            state, out, v, t = event_trial(
                state,
                srw,
                x01,
                x02,
                has_point,
                t1,
                t2,
                count_visits,
                has_inner,
                rin_sq,
                rout_sq,
                outer_exact,
                horizon,
                imin,
                omax,
            )
            outcomes[i] = out
            visits[i] = v
            steps[i] = t
        return outcomes, visits, steps

    @njit(nogil=True)
    def endpoint_chunk(seed, id_lo, id_hi, x01, x02, n_steps, hist, half):
        """Endpoints of exactly n_steps conditioned steps, histogrammed.

        hist is (2*half+1)^2, indexed by coordinate + half; endpoints
        outside the window are tallied in the returned overflow count.
        """
        overflow = 0
        su = np.uint64(seed)
        for i in range(id_hi - id_lo):
            state = init(su, np.uint64(id_lo + i))
            x1 = x01
            x2 = x02
            t = 0
            j = j0
            ahi_b = 0.0
            sup_b = 0
            inv_sb = 0.0
            while t < n_steps:
                rr = x1 * x1 + x2 * x2
                rem = n_steps - t
                while j >= 0 and not (rmin[j] <= rr and ks[j] <= rem):
                    j -= 1
                while j + 1 < nk and rmin[j + 1] <= rr and ks[j + 1] <= rem:
                    j += 1
                if j >= 0:
                    k = ks[j]
                    state, x1, x2, ahi_b, sup_b, inv_sb = block_cond(
                        state, x1, x2, k, offs[j], rr, ahi_b, sup_b, inv_sb
                    )
                    t += k
                else:
                    state, u = uni(state)
                    x1, x2 = step_cond(x1, x2, u)
                    t += 1
            if -half <= x1 <= half and -half <= x2 <= half:
                hist[x1 + half, x2 + half] += 1
            else:
                overflow += 1
        return overflow

    @njit(nogil=True)
    def minimum_chunk(
        seed, id_lo, id_hi, x01, x02, horizons, big_h, out_min_sq, out_rr, out_state
    ):
        """Running minima of |walk| over [n_j, big_h] for each horizon n_j.

        Minima are tracked as integer squared norms.  Block sizes are
        capped by |z| - max_open_minimum so no block can dip below any
        minimum still being tracked; dips are therefore only possible, and
        recorded, at observed positions.  Returns the final squared radius
        and RNG state per trial so the caller can resolve the post-big_h
        tail.
        """
        nh = horizons.shape[0]
        su = np.uint64(seed)
        for i in range(id_hi - id_lo):
            state = init(su, np.uint64(id_lo + i))
            x1 = x01
            x2 = x02
            t = 0
            j = j0
            nopen = 0
            mx_sq = -1
            mx_ri = 0
            ahi_b = 0.0
            sup_b = 0
            inv_sb = 0.0
            while True:
                rr = x1 * x1 + x2 * x2
                if nopen > 0 and rr < mx_sq:
                    mx_sq = -1
                    for w in range(nopen):
                        if rr < out_min_sq[i, w]:
                            out_min_sq[i, w] = rr
                        if out_min_sq[i, w] > mx_sq:
                            mx_sq = out_min_sq[i, w]
                    mx_ri = isqrt(mx_sq)
                    if mx_ri * mx_ri < mx_sq:
                        mx_ri += 1
                while nopen < nh and t == horizons[nopen]:
                    out_min_sq[i, nopen] = rr
                    nopen += 1
                    if rr > mx_sq:
                        mx_sq = rr
                        mx_ri = isqrt(mx_sq)
                        if mx_ri * mx_ri < mx_sq:
                            mx_ri += 1
                if t >= big_h:
                    break
                nxt = big_h if nopen >= nh else horizons[nopen]
                rem = nxt - t
                # below a tracked minimum the cap is k <= isq - mx_ri - 1,
                # i.e. (k + mx_ri + 1)^2 <= rr
                while j >= 0:
                    ok = rmin[j] <= rr and ks[j] <= rem
                    if ok and nopen > 0:
                        sm = ks[j] + mx_ri + 1
                        ok = sm * sm <= rr
                    if ok:
                        break
                    j -= 1
                while j + 1 < nk:
                    ok = rmin[j + 1] <= rr and ks[j + 1] <= rem
                    if ok and nopen > 0:
                        sm = ks[j + 1] + mx_ri + 1
                        ok = sm * sm <= rr
                    if not ok:
                        break
                    j += 1
                if j >= 0:
                    k = ks[j]
                    state, x1, x2, ahi_b, sup_b, inv_sb = block_cond(
                        state, x1, x2, k, offs[j], rr, ahi_b, sup_b, inv_sb
                    )
                    t += k
                else:
                    state, u = uni(state)
                    x1, x2 = step_cond(x1, x2, u)
                    t += 1
            out_rr[i] = x1 * x1 + x2 * x2
            out_state[i] = state

    @njit(nogil=True)
    def pair_chunk(
        seed,
        id_lo,
        id_hi,
        a1,
        a2,
        b1,
        b2,
        grid_lo,
        grid_hi,
        win_lo,
        win_hi,
        bnd,
        horizon,
        swap,
        out_counts,
        out_flags,
    ):
        """Two independent conditioned walks; meeting counts per window.

        Walk one of pair i draws from stream 2i, walk two from stream
        2i + 1 (swap reverses the assignment, for the exact relabeling
        check).  grid_lo/grid_hi are the probe windows for the
        meet-probability grid, win_lo/win_hi the coarser occupation
        windows; bnd is the sorted union of all their endpoints.  Meetings
        are only possible while the pair distance is small, and inside any
        counting window the block cap 2k < |z1-z2| forces single steps
        there, so every meeting inside a window is observed; membership is
        resolved at the landing time, keeping windows exactly half-open.
        """
        ng = grid_lo.shape[0]
        nw = win_lo.shape[0]
        nb = bnd.shape[0]
        su = np.uint64(seed)
        for i in range(id_hi - id_lo):
            ida = np.uint64(2 * (id_lo + i))
            idb = ida + _U1
            if swap:
                ida, idb = idb, ida
            s1 = init(su, ida)
            s2 = init(su, idb)
            x1 = a1
            x2 = a2
            y1 = b1
            y2 = b2
            t = 0
            j = j0
            pb = 0
            gidx = -1
            widx = -1
            counting = False
            fresh = True
            ah1 = 0.0
            sb1 = 0
            iv1 = 0.0
            ah2 = 0.0
            sb2 = 0
            iv2 = 0.0
            while t < horizon:
                if fresh:
                    while pb < nb and bnd[pb] <= t:
                        pb += 1
                    gidx = -1
                    for g in range(ng):
                        if grid_lo[g] <= t < grid_hi[g]:
                            gidx = g
                            break
                    widx = -1
                    for w in range(nw):
                        if win_lo[w] <= t < win_hi[w]:
                            widx = w
                            break
                    counting = gidx >= 0 or widx >= 0
                    fresh = False
                rr1 = x1 * x1 + x2 * x2
                rr2 = y1 * y1 + y2 * y2
                rlo = rr1 if rr1 < rr2 else rr2
                if counting:
                    d1 = x1 - y1
                    d2 = x2 - y2
                    dd = d1 * d1 + d2 * d2
                else:
                    dd = 0
                nxt = horizon if pb >= nb else bnd[pb]
                rem = nxt - t
                while j >= 0 and not (
                    rmin[j] <= rlo
                    and ks[j] <= rem
                    and (not counting or pmin[j] <= dd)
                ):
                    j -= 1
                while j + 1 < nk and (
                    rmin[j + 1] <= rlo
                    and ks[j + 1] <= rem
                    and (not counting or pmin[j + 1] <= dd)
                ):
                    j += 1
                if j >= 0:
                    k = ks[j]
                    off = offs[j]
                    s1, x1, x2, ah1, sb1, iv1 = block_cond(
                        s1, x1, x2, k, off, rr1, ah1, sb1, iv1
                    )
                    s2, y1, y2, ah2, sb2, iv2 = block_cond(
                        s2, y1, y2, k, off, rr2, ah2, sb2, iv2
                    )
                    t += k
                else:
                    s1, u1 = uni(s1)
                    x1, x2 = step_cond(x1, x2, u1)
                    s2, u2 = uni(s2)
                    y1, y2 = step_cond(y1, y2, u2)
                    t += 1
                if x1 == y1 and x2 == y2:
                    # meetings are rare: rescan window membership at the
                    # landing time so boundary instants land in the right
                    # half-open window (blocks can end exactly on one)
                    for g in range(ng):
                        if grid_lo[g] <= t < grid_hi[g]:
                            out_counts[i, g] += 1
                    for w in range(nw):
                        if win_lo[w] <= t < win_hi[w]:
                            out_flags[i] |= 1 << w
                if t >= nxt:
                    fresh = True

    @njit(nogil=True)
    def confine_chunk(seed, id_lo, id_hi, x01, x02, rout_sq, ro_floor, t_max, out_tau):
        """Exact first exit time of the disk rr <= rout_sq, censored at t_max.

        out_tau[i] = first t with rr > rout_sq, or t_max + 1 if the walk
        was still confined at t_max.  Blocks are capped away from the
        boundary so the crossing always happens on a single step.
        """
        omax = np.empty(nk, dtype=np.int64)
        for jj in range(nk):
            so = ro_floor - ks[jj]
            omax[jj] = so * so if so > 0 else 0
        su = np.uint64(seed)
        for i in range(id_hi - id_lo):
            state = init(su, np.uint64(id_lo + i))
            x1 = x01
            x2 = x02
            t = 0
            j = j0
            tau = t_max + 1
            ahi_b = 0.0
            sup_b = 0
            inv_sb = 0.0
            while t < t_max:
                rr = x1 * x1 + x2 * x2
                if rr > rout_sq:
                    tau = t
                    break
                rem = t_max - t
                while j >= 0 and not (
                    rmin[j] <= rr and ks[j] <= rem and rr < omax[j]
                ):
                    j -= 1
                while (
                    j + 1 < nk
                    and rmin[j + 1] <= rr
                    and ks[j + 1] <= rem
                    and rr < omax[j + 1]
                ):
                    j += 1
                if j >= 0:
                    k = ks[j]
                    state, x1, x2, ahi_b, sup_b, inv_sb = block_cond(
                        state, x1, x2, k, offs[j], rr, ahi_b, sup_b, inv_sb
                    )
                    t += k
                else:
                    state, u = uni(state)
                    x1, x2 = step_cond(x1, x2, u)
                    t += 1
            if tau > t_max and x1 * x1 + x2 * x2 > rout_sq:
                tau = t_max  # crossed exactly on the last allowed step
            out_tau[i] = tau

    @njit(nogil=True)
    def visit_window_chunk(seed, id_lo, id_hi, srw, x01, x02, t1, t2, bnd, out_flags):
        """Visits to (t1, t2) per time window [bnd[w], bnd[w+1]) as a bitmask.

        srw selects the unconditioned walk (the recurrence demonstration,
        target origin); with srw false the same windows probe the
        conditioned walk against a nonzero target, whose visit fractions
        must decay instead.  Blocks are capped away from the target, so a
        visit always lands on a single step, and window membership is
        resolved at the landing time, keeping windows exactly half-open.
        """
        nw = bnd.shape[0] - 1
        horizon = bnd[nw]
        su = np.uint64(seed)
        for i in range(id_hi - id_lo):
            state = init(su, np.uint64(id_lo + i))
            x1 = x01
            x2 = x02
            t = 0
            j = j0
            w = 0
            flags = 0
            ahi_b = 0.0
            sup_b = 0
            inv_sb = 0.0
            while t < horizon:
                while w < nw - 1 and t >= bnd[w + 1]:
                    w += 1
                rr = x1 * x1 + x2 * x2
                d1 = x1 - t1
                d2 = x2 - t2
                dd = d1 * d1 + d2 * d2
                rem = bnd[w + 1] - t
                while j >= 0 and not (
                    rmin[j] <= dd and ks[j] <= rem and (srw or rmin[j] <= rr)
                ):
                    j -= 1
                while (
                    j + 1 < nk
                    and rmin[j + 1] <= dd
                    and ks[j + 1] <= rem
                    and (srw or rmin[j + 1] <= rr)
                ):
                    j += 1
                if j >= 0:
                    k = ks[j]
                    off = offs[j]
                    if srw:
                        state, x1, x2 = block_free(state, x1, x2, k, off)
                    else:
                        state, x1, x2, ahi_b, sup_b, inv_sb = block_cond(
                            state, x1, x2, k, off, rr, ahi_b, sup_b, inv_sb
                        )
                    t += k
                else:
                    state, u = uni(state)
                    if srw:
                        x1, x2 = step_srw(x1, x2, u)
                    else:
                        x1, x2 = step_cond(x1, x2, u)
                    t += 1
                    if x1 == t1 and x2 == t2 and t >= bnd[0] and t < horizon:
                        ww = w
                        while ww < nw - 1 and t >= bnd[ww + 1]:
                            ww += 1
                        flags |= 1 << ww
            out_flags[i] = flags

    @njit(nogil=True)
    def path(seed, stream_id, srw, x01, x02, n_steps):
        """Single-step path, one uniform per step; mirrors walk.sample_path."""
        pos = np.empty((n_steps + 1, 2), dtype=np.int64)
        state = init(np.uint64(seed), np.uint64(stream_id))
        x1 = x01
        x2 = x02
        pos[0, 0] = x1
        pos[0, 1] = x2
        for t in range(n_steps):
            state, u = uni(state)
            if srw:
                x1, x2 = step_srw(x1, x2, u)
            else:
                x1, x2 = step_cond(x1, x2, u)
            pos[t + 1, 0] = x1
            pos[t + 1, 1] = x2
        return pos

    return Kernels(
        tables=bt,
        event_chunk=event_chunk,
        endpoint_chunk=endpoint_chunk,
        minimum_chunk=minimum_chunk,
        pair_chunk=pair_chunk,
        confine_chunk=confine_chunk,
        visit_window_chunk=visit_window_chunk,
        path=path,
    )


_KERNELS: Kernels | None = None


def default_kernels() -> Kernels:
    """Process-wide kernels over the default potential table."""
    global _KERNELS
    if _KERNELS is None:
        _KERNELS = build_kernels()
    return _KERNELS
