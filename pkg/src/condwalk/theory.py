"""Closed-form probabilities and the Green function of the conditioned walk.

Every expression here is algebra in the potential kernel ``a``:

* return probability     1 - 1/(2 a(x))
* hitting probability    (a(x) + a(y) - a(x - y)) / (2 a(x))
* Green function         (a(y) / a(x)) (a(x) + a(y) - a(x - y))
* escape probability     1 - a(n)/a(x), remainder O(1/n)/a(x)
* annulus escape         (a(x) - a(r))/(a(L) - a(r)) * a(L)/a(x),
                         remainders O(1/r) on both differences and a
                         multiplicative 1 + O(1/L)
* SRW exit before hit    a(x)/a(L), remainder O((|y| v 1)/L) in a(L)

Formulas that involve an unquantified remainder return a
:class:`BracketedValue` whose bounds absorb the remainder with an explicit
constant (default 1).  The default is calibrated by simulation in the test
suite; if it were too small the comparison gates would fail loudly rather
than widen silently.

Radii written as plain numbers (the ``n``, ``r``, ``L`` arguments) always
refer to the real-argument radial form ``(2/pi) ln r + kappa``; lattice
arguments go through the exact table.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

from .errors import DomainError
from .potential import (
    PotentialTable,
    _check_point,
    default_table,
    potential,
    potential_radius,
)

__all__ = [
    "BracketedValue",
    "return_prob",
    "hit_prob",
    "green",
    "escape_prob",
    "annulus_escape_prob",
    "srw_exit_before_hit",
    "lclt_prediction",
    "boundary_hit_bound",
    "boundary_disk_hit_bound",
]


@dataclass(frozen=True)
class BracketedValue:
    """A value with explicit systematic bounds, ``sys_lo <= value <= sys_hi``.

    The bounds absorb remainder terms that the closed form controls only
    up to a constant; statistical error is never part of the bracket.
    """

    value: float
    sys_lo: float
    sys_hi: float

    def __post_init__(self):
        if not (self.sys_lo <= self.value <= self.sys_hi):
            raise DomainError(
                f"bracket must contain its value: {self.sys_lo!r} <= "
                f"{self.value!r} <= {self.sys_hi!r} fails"
            )

    @classmethod
    def point(cls, value: float) -> "BracketedValue":
        """A degenerate bracket for formulas without remainder terms."""
        return cls(value=value, sys_lo=value, sys_hi=value)

    @property
    def width(self) -> float:
        return self.sys_hi - self.sys_lo


def _nonzero_point(p, what: str) -> tuple[int, int]:
    x1, x2 = _check_point(p)
    if x1 == 0 and x2 == 0:
        raise DomainError(f"{what} must not be the origin")
    return x1, x2


def _check_index(n, what: str) -> int:
    try:
        return operator.index(n)
    except TypeError:
        raise DomainError(f"{what} must be an integer, got {n!r}") from None


def _check_constant(k: float) -> float:
    k = float(k)
    if not k > 0.0:
        raise DomainError("remainder constant must be positive")
    return k


def return_prob(x, table: PotentialTable | None = None) -> float:
    """Probability that the conditioned walk started at x returns to x."""
    x = _nonzero_point(x, "x")
    return 1.0 - 1.0 / (2.0 * potential(x, table))


def hit_prob(x, y, table: PotentialTable | None = None) -> float:
    """Probability that the conditioned walk from x ever visits y."""
    x1, x2 = _nonzero_point(x, "x")
    y1, y2 = _nonzero_point(y, "y")
    if (x1, x2) == (y1, y2):
        raise DomainError("x and y must differ; use return_prob for returns")
    ax = potential((x1, x2), table)
    ay = potential((y1, y2), table)
    axy = potential((x1 - y1, x2 - y2), table)
    return (ax + ay - axy) / (2.0 * ax)


def green(x, y, table: PotentialTable | None = None) -> float:
    """Expected visits to y of the conditioned walk started at x.

    The same expression covers y = x, where it reduces to 2 a(x).
    """
    x1, x2 = _nonzero_point(x, "x")
    y1, y2 = _nonzero_point(y, "y")
    ax = potential((x1, x2), table)
    ay = potential((y1, y2), table)
    axy = potential((x1 - y1, x2 - y2), table)
    return (ay / ax) * (ax + ay - axy)


def escape_prob(
    x,
    n: int,
    table: PotentialTable | None = None,
    remainder_constant: float = 1.0,
) -> BracketedValue:
    """Probability that the conditioned walk from x never enters B(n).

    ``1 - a(n)/a(x)`` with the remainder ``O(1/n)`` of the radial
    approximation absorbed into a bracket of half-width K/(n a(x)).
    """
    x = _nonzero_point(x, "x")
    n = _check_index(n, "disk radius n")
    if n < 1:
        raise DomainError("disk radius n must be a positive integer")
    k = _check_constant(remainder_constant)
    if x[0] * x[0] + x[1] * x[1] < (n + 1) * (n + 1):
        raise DomainError(f"need |x| >= n + 1, got x={x!r}, n={n}")
    ax = potential(x, table)
    value = 1.0 - potential_radius(n) / ax
    pad = k / (n * ax)
    return BracketedValue(value=value, sys_lo=value - pad, sys_hi=value + pad)


def annulus_escape_prob(
    x,
    r: float,
    L: float,
    table: PotentialTable | None = None,
    remainder_constant: float = 1.0,
) -> BracketedValue:
    """Probability that the conditioned walk from x reaches |z| > L before
    entering B(r), for r + 1 <= |x| <= L - 1.

    The bracket propagates all three remainders by interval arithmetic:
    K/r on the two potential differences and a factor 1 +- K/L outside.
    """
    x = _nonzero_point(x, "x")
    r, L = float(r), float(L)
    if not (r > 0.0 and L > 0.0):
        raise DomainError("radii must be positive")
    k = _check_constant(remainder_constant)
    radius = math.hypot(x[0], x[1])
    if not (r + 1.0 <= radius <= L - 1.0):
        raise DomainError(f"need r + 1 <= |x| <= L - 1, got |x|={radius:.3f}")
    ax = potential(x, table)
    ar = potential_radius(r)
    aL = potential_radius(L)
    d_r = k / r
    d_L = k / L
    num = ax - ar
    den = aL - ar
    if den - d_r <= 0.0:
        raise DomainError(
            "annulus too thin: the O(1/r) remainder overwhelms a(L) - a(r)"
        )
    scale = aL / ax
    value = num / den * scale
    lo = max(num - d_r, 0.0) / (den + d_r) * scale * (1.0 - d_L)
    hi = (num + d_r) / (den - d_r) * scale * (1.0 + d_L)
    return BracketedValue(value=value, sys_lo=lo, sys_hi=hi)


def srw_exit_before_hit(
    x,
    y,
    L: float,
    table: PotentialTable | None = None,
    remainder_constant: float = 1.0,
) -> BracketedValue:
    """Probability that SRW from x leaves the disk B(y, L) before hitting
    the origin, for x in B(y, L) and |y| <= L - 2.

    ``a(x)/a(L)`` with the O((|y| v 1)/L) denominator remainder absorbed
    into a bracket of half-width K (|y| v 1) / (L a(L)).
    """
    x = _nonzero_point(x, "x")
    y1, y2 = _check_point(y)
    L = float(L)
    if not L > 0.0:
        raise DomainError("L must be positive")
    k = _check_constant(remainder_constant)
    if math.hypot(x[0] - y1, x[1] - y2) > L:
        raise DomainError("x must lie in B(y, L)")
    if math.hypot(y1, y2) > L - 2.0:
        raise DomainError("need |y| <= L - 2")
    aL = potential_radius(L)
    value = potential(x, table) / aL
    pad = k * max(math.hypot(y1, y2), 1.0) / (L * aL)
    return BracketedValue(value=value, sys_lo=value - pad, sys_hi=value + pad)


def _envelope_pads(table: PotentialTable | None) -> tuple[float, float]:
    """Global envelope constants (excess, deficit) so that
    asym(|w|) - deficit <= a(w) <= asym(|w|) + excess for every w != 0.

    Inside the table both sups are measured exactly; beyond it the
    asymptote error is below the crossover error, which is folded in.
    """
    if table is None:
        table = default_table()
    excess = max(table.excess_over_asymptote, table.crossover_error)
    deficit = max(table.deficit_under_asymptote, table.crossover_error)
    return excess, deficit


def boundary_hit_bound(y, R: float, table: PotentialTable | None = None) -> float:
    """An upper bound for sup over |z| >= R of hit_prob(z, y).

    This is the systematic error of deciding an "ever hits y" event by
    exit from B(R): a walk stopped at the boundary could still have come
    back.  Writing the hitting formula as
    a(y)/(2 a(z)) + (a(z) - a(z - y))/(2 a(z)) and using the global
    envelopes a(w) in asym(|w|) +- pad together with |z - y| >= |z| - |y|
    makes every factor monotone in |z|, so the sup is reached at |z| = R:

        [a(y) + (2/pi) ln(R/(R - |y|)) + excess + deficit]
            / (2 (asym(R) - deficit)).
    """
    y1, y2 = _nonzero_point(y, "y")
    R = float(R)
    ry = math.hypot(y1, y2)
    if not R >= 2.0 * ry:
        raise DomainError(f"need R >= 2|y| for the boundary bound, got R={R}")
    excess, deficit = _envelope_pads(table)
    ay = potential((y1, y2), table)
    num = ay + (2.0 / math.pi) * math.log(R / (R - ry)) + excess + deficit
    den = 2.0 * (potential_radius(R) - deficit)
    if den <= 0.0:
        raise DomainError("R too small: lower envelope of a is not positive")
    return min(num / den, 1.0)


def boundary_disk_hit_bound(
    n: int, R: float, table: PotentialTable | None = None
) -> float:
    """An upper bound for sup over |z| >= R of P[conditioned walk from z
    ever enters B(n)].

    Optional stopping of the martingale 1/a on the entry site w (which has
    |w| <= n, so a(w) <= asym(n) + excess... bounded via the first entry
    ring n - 1 < |w| <= n) gives P <= max a(entry ring)/a(z).
    """
    n = _check_index(n, "disk radius n")
    if n < 1:
        raise DomainError("disk radius n must be a positive integer")
    R = float(R)
    if not R >= n + 1:
        raise DomainError("need R >= n + 1")
    excess, deficit = _envelope_pads(table)
    num = potential_radius(n) + excess
    den = potential_radius(R) - deficit
    if den <= 0.0:
        raise DomainError("R too small: lower envelope of a is not positive")
    return min(num / den, 1.0)


def lclt_prediction(n: int, y, table: PotentialTable | None = None) -> float:
    """The local-limit comparison scale a(y)^2 / (n ln^2 n).

    A shape for the n-step point probabilities of the conditioned walk,
    exact up to bounded multiplicative constants; not itself a probability.
    """
    n = _check_index(n, "n")
    if n < 2:
        raise DomainError("n must be at least 2")
    y = _nonzero_point(y, "y")
    ay = potential(y, table)
    return (ay * ay) / (math.log(n) ** 2 * n)
