"""Path sampling for the simple and origin-avoiding lattice walks.

The origin-avoiding walk moves from ``x`` to a neighbor ``y`` with
probability ``a(y) / (4 a(x))``, the Doob transform of simple random walk
by the potential kernel.  Since ``a(0) = 0``, the walk never steps onto
the origin; since ``a`` is harmonic off the origin, the four
probabilities sum to one.

Everything here is plain Python and serves as the readable reference
implementation.  The compiled kernels in :mod:`condwalk.engine` reproduce
the per-step arithmetic of :func:`_step` order of operation for order of
operation, so both samplers emit identical paths from identical streams.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .potential import KAPPA, PotentialTable, _check_point, default_table
from .rng import Stream

__all__ = [
    "WalkKind",
    "Trajectory",
    "StopTimes",
    "HitPoint",
    "ExitDisk",
    "EnterDisk",
    "step_distribution",
    "sample_path",
    "run_until",
    "future_minimum_profile",
    "last_exit_time",
]

_INV_PI = 1.0 / math.pi

# Fixed neighbor order used by every sampler: East, North, West, South.
_NEIGHBORS = ((1, 0), (0, 1), (-1, 0), (0, -1))


class WalkKind(enum.Enum):
    """Which transition kernel drives the walk."""

    SRW = "srw"
    CONDITIONED = "cond"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A sampled path: the start plus the position after every step.

    ``positions`` has shape ``(n_steps + 1, 2)`` with row 0 equal to
    ``start``.  ``master_seed`` and ``stream_id`` identify the random
    stream that produced the path, so a trajectory can always be
    regenerated from scratch.
    """

    kind: WalkKind
    start: tuple[int, int]
    positions: np.ndarray = field(repr=False)
    master_seed: int
    stream_id: int

    @property
    def n_steps(self) -> int:
        return len(self.positions) - 1

    @property
    def steps(self) -> np.ndarray:
        """Positions after each step (the path without its start)."""
        return self.positions[1:]


@dataclass(frozen=True)
class StopTimes:
    """First hitting times of a target under an explicit step cap.

    ``tau`` is the first ``n >= 0`` at which the target holds, ``tau_plus``
    the first ``n >= 1``.  ``None`` means the target was not reached within
    ``horizon``; that is a normal outcome, not an error.
    """

    tau: int | None
    tau_plus: int | None
    horizon: int


# --- target descriptions for run_until ---------------------------------------


@dataclass(frozen=True)
class HitPoint:
    """Target holds when the walk sits exactly on ``point``."""

    point: tuple[int, int]


@dataclass(frozen=True)
class ExitDisk:
    """Target holds when ``|position| > radius`` (walk left the closed disk)."""

    radius: float


@dataclass(frozen=True)
class EnterDisk:
    """Target holds when ``|position| <= radius``."""

    radius: float


def _compile_target(target):
    """Return ``predicate(x1, x2) -> bool`` for a target description.

    Disk memberships compare squared integer norms against floor(radius^2),
    so lattice points are never misclassified by float rounding.
    """
    if isinstance(target, HitPoint):
        p1, p2 = _check_point(target.point)
        return lambda x1, x2: x1 == p1 and x2 == p2
    if isinstance(target, ExitDisk):
        if not target.radius > 0:
            raise DomainError("disk radius must be positive")
        r_sq = math.floor(float(target.radius) ** 2)
        return lambda x1, x2: x1 * x1 + x2 * x2 > r_sq
    if isinstance(target, EnterDisk):
        if not target.radius > 0:
            raise DomainError("disk radius must be positive")
        r_sq = math.floor(float(target.radius) ** 2)
        return lambda x1, x2: x1 * x1 + x2 * x2 <= r_sq
    raise DomainError(f"unrecognized target description: {target!r}")


# --- the step rule ------------------------------------------------------------


def _a_value(x1: int, x2: int, table: PotentialTable) -> float:
    """Potential kernel at (x1, x2): table inside its disk, asymptote outside."""
    rr = x1 * x1 + x2 * x2
    if rr <= table.exact_radius * table.exact_radius:
        return float(table.grid[abs(x1), abs(x2)])
    return _INV_PI * math.log(float(rr)) + KAPPA


def _step(kind: WalkKind, x1: int, x2: int, table, u: float):
    """One step from (x1, x2) driven by the uniform ``u``.

    Inverse CDF over the fixed E, N, W, S order.  A neighbor equal to the
    origin has probability zero and an empty selection interval, so the
    strict ``<`` tests can never choose it; the only leak is the final
    else-branch when the cumulative sum rounds below 1, and the explicit
    fallback keeps that branch off the origin too.
    """
    if kind is WalkKind.SRW:
        if u < 0.25:
            return x1 + 1, x2
        if u < 0.5:
            return x1, x2 + 1
        if u < 0.75:
            return x1 - 1, x2
        return x1, x2 - 1
    d = 4.0 * _a_value(x1, x2, table)
    c = _a_value(x1 + 1, x2, table) / d
    if u < c:
        return x1 + 1, x2
    c += _a_value(x1, x2 + 1, table) / d
    if u < c:
        return x1, x2 + 1
    c += _a_value(x1 - 1, x2, table) / d
    if u < c:
        return x1 - 1, x2
    if x1 == 0 and x2 == 1:
        # South neighbor is the origin: the leak branch falls back to West.
        return x1 - 1, x2
    return x1, x2 - 1


def _require_valid_start(kind: WalkKind, x1: int, x2: int) -> None:
    if kind is WalkKind.CONDITIONED and x1 == 0 and x2 == 0:
        raise DomainError("the origin-avoiding walk cannot start at the origin")


# --- public operations ---------------------------------------------------------


def step_distribution(kind: WalkKind, x, table: PotentialTable | None = None):
    """Four ``(neighbor, probability)`` pairs in E, N, W, S order.

    SRW gives 1/4 each.  The origin-avoiding walk gives a(y) / (4 a(x)),
    which is zero exactly when ``y`` is the origin and sums to one within
    float rounding by harmonicity of ``a``.
    """
    x1, x2 = _check_point(x)
    if kind is WalkKind.SRW:
        return [((x1 + dx, x2 + dy), 0.25) for dx, dy in _NEIGHBORS]
    _require_valid_start(kind, x1, x2)
    if table is None:
        table = default_table()
    d = 4.0 * _a_value(x1, x2, table)
    return [
        ((x1 + dx, x2 + dy), _a_value(x1 + dx, x2 + dy, table) / d)
        for dx, dy in _NEIGHBORS
    ]


def sample_path(
    kind: WalkKind,
    start,
    n_steps: int,
    stream: Stream,
    table: PotentialTable | None = None,
) -> Trajectory:
    """Walk exactly ``n_steps`` steps and return the stored path."""
    x1, x2 = _check_point(start)
    _require_valid_start(kind, x1, x2)
    if n_steps < 0:
        raise DomainError("n_steps must be nonnegative")
    if table is None and kind is WalkKind.CONDITIONED:
        table = default_table()
    positions = np.empty((n_steps + 1, 2), dtype=np.int64)
    positions[0, 0] = x1
    positions[0, 1] = x2
    for n in range(1, n_steps + 1):
        x1, x2 = _step(kind, x1, x2, table, stream.next_uniform())
        positions[n, 0] = x1
        positions[n, 1] = x2
    return Trajectory(
        kind=kind,
        start=(int(positions[0, 0]), int(positions[0, 1])),
        positions=positions,
        master_seed=stream.master_seed,
        stream_id=stream.stream_id,
    )


def run_until(
    kind: WalkKind,
    start,
    target,
    horizon: int,
    stream: Stream,
    table: PotentialTable | None = None,
):
    """Walk until ``target`` holds, without storing the path.

    Returns ``(StopTimes, final_position)``.  ``tau`` counts from step 0
    (it is 0 when the start already satisfies the target), ``tau_plus``
    from step 1.  If the target is not reached within ``horizon`` steps the
    corresponding field is None and the final position is wherever the
    walk stood at the horizon.
    """
    x1, x2 = _check_point(start)
    _require_valid_start(kind, x1, x2)
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    if table is None and kind is WalkKind.CONDITIONED:
        table = default_table()
    predicate = _compile_target(target)
    at_start = predicate(x1, x2)
    tau_plus = None
    for n in range(1, horizon + 1):
        x1, x2 = _step(kind, x1, x2, table, stream.next_uniform())
        if predicate(x1, x2):
            tau_plus = n
            break
    tau = 0 if at_start else tau_plus
    return StopTimes(tau=tau, tau_plus=tau_plus, horizon=horizon), (x1, x2)


def future_minimum_profile(traj: Trajectory, checkpoints):
    """``(n, M_n)`` pairs with ``M_n = min_{m >= n} |position(m)|``.

    One backward sweep builds the suffix minimum of the squared radii;
    within a single trajectory M is non-decreasing in n.  ``checkpoints``
    must be strictly increasing and lie in ``[0, n_steps]``.
    """
    cps = np.asarray(checkpoints, dtype=np.int64)
    if cps.ndim != 1:
        raise DomainError("checkpoints must be a flat integer sequence")
    if cps.size == 0:
        return []
    if np.any(np.diff(cps) <= 0):
        raise DomainError("checkpoints must be strictly increasing")
    if cps[0] < 0 or cps[-1] > traj.n_steps:
        raise DomainError("checkpoints must lie within the trajectory")
    pos = traj.positions
    norm_sq = pos[:, 0] * pos[:, 0] + pos[:, 1] * pos[:, 1]
    suffix_min = np.minimum.accumulate(norm_sq[::-1])[::-1]
    return [(int(n), math.sqrt(float(suffix_min[n]))) for n in cps]


def last_exit_time(traj: Trajectory, u: float):
    """Largest ``n`` with ``|position(n)| <= u``, or None if there is none.

    Radii are evaluated as correctly rounded doubles, exactly as
    :func:`future_minimum_profile` reports them, so the identity
    {T_u >= n} = {M_n <= u} holds verbatim for every float ``u``.
    """
    pos = traj.positions
    norm_sq = pos[:, 0] * pos[:, 0] + pos[:, 1] * pos[:, 1]
    radii = np.sqrt(norm_sq.astype(np.float64))
    inside = np.nonzero(radii <= float(u))[0]
    if inside.size == 0:
        return None
    return int(inside[-1])
