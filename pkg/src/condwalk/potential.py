"""The potential kernel of the planar simple random walk.

The potential kernel ``a`` assigns to every lattice point the expected
excess number of visits to the origin of a walk started there, relative to
a walk started at the origin.  It vanishes at the origin, equals 1 on the
four neighbours, is discretely harmonic everywhere else, and grows like
``(2/pi) ln|p| + kappa`` with ``kappa = (2*euler_gamma + 3*ln 2)/pi``.
Everything else in this package (conditioned transition probabilities,
hitting formulas, escape probabilities) is written in terms of ``a``.

Exact values on a disk come from :func:`build_table`; outside the disk the
logarithmic asymptote is accurate to ``O(|p|^-2)`` and takes over.  The
table construction is the classical one: closed-form values on the
diagonal seed a column-by-column sweep of the harmonicity identity through
the first octant.  The sweep amplifies perturbations of the seed roughly
geometrically, so it is carried out in exact rational arithmetic: every
value is of the form ``p + q * (4/pi)`` with rational ``p, q``, the sweep
preserves that form exactly, and rounding happens only once per point when
converting to a double.

:func:`potential_oracle` evaluates ``a`` by an independent route, the
Fourier integral

    a(p) = (2 pi)^-2  int_{[-pi,pi]^2} (1 - cos(p.theta))
                                        / (1 - (cos t1 + cos t2)/2) dtheta,

reduced to one dimension by integrating the first angle out in closed form
(a residue computation; the removable singularity at theta = 0 is tamed by
evaluating the integrand through ``log1p``/``expm1``).  Tables are checked
against the oracle, never against themselves.
"""

from __future__ import annotations

import math
import operator
import warnings
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import ConstructionError, DomainError, OracleError

DEFAULT_RADIUS = 512
_MIN_RADIUS = 1
_MAX_RADIUS = 4096

#: kappa = (2*euler_gamma + 3*ln 2) / pi, the constant term of the asymptote.
KAPPA = (2.0 * np.euler_gamma + 3.0 * math.log(2.0)) / math.pi

#: Coordinates must satisfy |x_i| < 2**31 so squared norms stay inside int64.
_COORD_BOUND = 2**31

#: Tolerance for the harmonicity residual scan of a freshly built table.
_RESIDUAL_TOL = 1e-8


def _check_point(p) -> tuple[int, int]:
    """Validate and unpack a lattice point; coordinates must be integers."""
    try:
        x1, x2 = p
        x1, x2 = operator.index(x1), operator.index(x2)
    except (TypeError, ValueError):
        raise DomainError(f"not a lattice point: {p!r}") from None
    if abs(x1) >= _COORD_BOUND or abs(x2) >= _COORD_BOUND:
        raise DomainError(f"coordinates out of range (|x_i| < 2^31): {p!r}")
    return x1, x2


def potential_radius(r: float) -> float:
    """Real-argument radial asymptote ``(2/pi) ln r + kappa``.

    This is the function of a real radius that the hitting and escape
    formulas use when a disk radius appears where a lattice point would
    otherwise be expected.
    """
    r = float(r)
    if not r > 0.0:
        raise DomainError(f"radius must be positive, got {r!r}")
    return (2.0 / math.pi) * math.log(r) + KAPPA


def _octant_index(x: int, y: int) -> int:
    """Flat index of octant point (x, y), 0 <= y <= x."""
    return x * (x + 1) // 2 + y


@dataclass
class PotentialTable:
    """Exact potential-kernel values on the disk ``|p| <= exact_radius``.

    ``values`` stores one double per canonical octant representative
    ``0 <= y <= x <= exact_radius`` in :func:`_octant_index` order; lookups map
    point to its representative through the eightfold lattice symmetry.
    ``grid`` is the same data unfolded to a dense quadrant, which is what
    the compiled simulation kernels index into.
    """

    exact_radius: int
    values: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)
    #: sup of |table - asymptote| on the matching ring radius-1 < |p| <= radius.
    crossover_error: float
    #: sup of (table - asymptote) over 1 <= |p| <= radius; an upper envelope
    #: pad used by the samplers to bound a() over a disk.
    excess_over_asymptote: float
    #: sup of (asymptote - table) over the same range; with the crossover
    #: error this gives a global lower envelope a >= asymptote - deficit,
    #: which the truncation bounds need.
    deficit_under_asymptote: float

    def contains(self, p) -> bool:
        x1, x2 = _check_point(p)
        return x1 * x1 + x2 * x2 <= self.exact_radius * self.exact_radius

    def lookup(self, p) -> float:
        """Exact value at ``p``; requires ``|p| <= radius``."""
        x1, x2 = _check_point(p)
        x, y = abs(x1), abs(x2)
        if y > x:
            x, y = y, x
        if x * x + y * y > self.exact_radius * self.exact_radius:
            raise DomainError(
                f"point {p!r} outside exact disk of radius {self.exact_radius}"
            )
        return float(self.values[_octant_index(x, y)])


def _diagonal_q(n: int, cache: list) -> "gmpy2.mpq":
    """Rational q with a(n, n) = q * (4/pi): the odd harmonic sum."""
    while len(cache) <= n:
        k = len(cache)
        cache.append(cache[k - 1] + gmpy2.mpq(1, 2 * k - 1))
    return cache[n]


def build_table(exact_radius: int = DEFAULT_RADIUS) -> PotentialTable:
    """Build the exact table on ``|p| <= exact_radius``.

    Raises :class:`ConstructionError` if the finished table has a negative
    entry away from the origin or a harmonicity residual above 1e-8; these
    would mean the arithmetic below is wrong, so they fail loudly rather
    than fall back to the asymptote.
    """
    if not isinstance(exact_radius, (int, np.integer)) or isinstance(exact_radius, bool):
        raise DomainError(f"radius must be an integer, got {exact_radius!r}")
    radius = int(exact_radius)
    if not _MIN_RADIUS <= radius <= _MAX_RADIUS:
        raise DomainError(
            f"radius must lie in [{_MIN_RADIUS}, {_MAX_RADIUS}], got {radius}"
        )

    size = _octant_index(radius, radius) + 1
    values = np.empty(size, dtype=np.float64)

    # Exact representation a = p + q*(4/pi).  The sweep is linear with
    # integer coefficients, so the (p, q) pairs evolve exactly; |q| grows
    # by about 2.55 bits per column (the growing mode of the recurrence)
    # and the precision of the final rounding step is sized to match.
    prec = 128 + int(2.8 * radius)
    with gmpy2.context(precision=prec) as gctx:
        four_over_pi = gmpy2.mpfr(4) / gmpy2.const_pi(prec)

        def to_float(p, q):
            return float(gmpy2.mpfr(p, prec) + gmpy2.mpfr(q, prec) * four_over_pi)

        zero = gmpy2.mpq(0)
        one = gmpy2.mpq(1)
        diag_cache = [zero, one]

        # Columns 0 and 1 are seeds: a(0,0) = 0, a(1,0) = 1, a(1,1) = 4/pi.
        values[_octant_index(0, 0)] = 0.0
        values[_octant_index(1, 0)] = 1.0
        values[_octant_index(1, 1)] = to_float(zero, one)
        col_prev = [(zero, zero)]                 # column x-1: y = 0..x-1
        col_cur = [(one, zero), (zero, one)]      # column x:   y = 0..x

        for x in range(1, radius):
            nxt = []
            # y = 0: harmonicity at (x, 0) with a(x, -1) = a(x, 1).
            p0, q0 = col_cur[0]
            pm, qm = col_prev[0]
            p1, q1 = col_cur[1]
            nxt.append((4 * p0 - pm - 2 * p1, 4 * q0 - qm - 2 * q1))
            # 1 <= y <= x-1: harmonicity at (x, y).
            for y in range(1, x):
                pc, qc = col_cur[y]
                pw, qw = col_prev[y]
                pn, qn = col_cur[y + 1]
                ps, qs = col_cur[y - 1]
                nxt.append((4 * pc - pw - pn - ps, 4 * qc - qw - qn - qs))
            # y = x: harmonicity at (x, x), folded across the diagonal.
            pd, qd = col_cur[x]
            ps, qs = col_cur[x - 1]
            nxt.append((2 * pd - ps, 2 * qd - qs))
            # y = x+1: closed-form diagonal seed.
            nxt.append((zero, _diagonal_q(x + 1, diag_cache)))

            qbits = max(
                q.numerator.bit_length() - q.denominator.bit_length()
                for _, q in nxt
            )
            if qbits + 64 > prec:
                prec = 2 * (qbits + 64)
                gctx.precision = prec
                four_over_pi = gmpy2.mpfr(4) / gmpy2.const_pi(prec)
            base = _octant_index(x + 1, 0)
            for y, (p, q) in enumerate(nxt):
                values[base + y] = to_float(p, q)
            col_prev, col_cur = col_cur, nxt

    return _finish_table(radius, values)


def _unfold_quadrant(radius: int, values: np.ndarray) -> np.ndarray:
    n = radius + 1
    xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    hi = np.maximum(xs, ys)
    lo = np.minimum(xs, ys)
    return values[hi * (hi + 1) // 2 + lo]


def _finish_table(radius: int, values: np.ndarray) -> PotentialTable:
    grid = _unfold_quadrant(radius, values)
    n = radius + 1
    xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    rr = xs * xs + ys * ys
    in_disk = rr <= radius * radius
    off_origin = rr > 0

    if np.any(grid[in_disk & off_origin] <= 0.0):
        raise ConstructionError("nonpositive potential value inside the exact disk")

    # Harmonicity residual wherever all four neighbours stay in the disk.
    # Points (x, y) with x in [1, radius-1], y in [0, radius-1]; the y = 0
    # row reflects its south neighbour across the axis.
    centre = grid[1:-1, :-1]
    south = np.empty_like(centre)
    south[:, 1:] = grid[1:-1, :-2]
    south[:, 0] = grid[1:-1, 1]
    resid = np.abs(
        4.0 * centre - grid[2:, :-1] - grid[:-2, :-1] - grid[1:-1, 1:] - south
    )
    mask = (
        (rr[1:-1, :-1] <= (radius - 1) ** 2)
        & off_origin[1:-1, :-1]
    )
    # Column x = 0, y in [1, radius-1]: west neighbour reflects to (1, y).
    resid0 = np.abs(
        4.0 * grid[0, 1:-1] - 2.0 * grid[1, 1:-1] - grid[0, 2:] - grid[0, :-2]
    )
    mask0 = rr[0, 1:-1] <= (radius - 1) ** 2
    worst = max(
        float(resid[mask].max()) if mask.any() else 0.0,
        float(resid0[mask0].max()) if mask0.any() else 0.0,
    )
    if worst > _RESIDUAL_TOL:
        raise ConstructionError(
            f"harmonicity residual {worst:.3e} exceeds {_RESIDUAL_TOL:.0e}; "
            "table construction is unsound"
        )

    with np.errstate(divide="ignore"):
        asym = (1.0 / math.pi) * np.log(rr.astype(np.float64)) + KAPPA
    ring = in_disk & (rr > (radius - 1) ** 2)
    crossover = float(np.max(np.abs(grid[ring] - asym[ring])))
    excess = float(np.max((grid - asym)[in_disk & off_origin]))
    deficit = float(np.max((asym - grid)[in_disk & off_origin]))
    return PotentialTable(
        exact_radius=radius,
        values=values,
        grid=grid,
        crossover_error=crossover,
        excess_over_asymptote=max(excess, 0.0),
        deficit_under_asymptote=max(deficit, 0.0),
    )


_default_table: PotentialTable | None = None


def default_table() -> PotentialTable:
    """The lazily built table at :data:`DEFAULT_RADIUS` (built once)."""
    global _default_table
    if _default_table is None:
        _default_table = build_table(DEFAULT_RADIUS)
    return _default_table


def potential(p, table: PotentialTable | None = None) -> float:
    """Value of the potential kernel at lattice point ``p``.

    Exact (table) inside the table's disk, radial asymptote outside; the
    mismatch at the crossover is the table's ``crossover_error``
    (about 2e-7 at the default radius).
    """
    x1, x2 = _check_point(p)
    if x1 == 0 and x2 == 0:
        return 0.0
    if table is None:
        table = default_table()
    rr = x1 * x1 + x2 * x2
    if rr <= table.exact_radius * table.exact_radius:
        return table.lookup((x1, x2))
    return (1.0 / math.pi) * math.log(float(rr)) + KAPPA


def _reduced_integrand(theta: float, n1: int, n2: int) -> float:
    # c = 2 - cos(theta) >= 1, written through sin(theta/2) so the small-
    # theta regime keeps full precision; eta = arccosh(c) via log1p.
    s2 = math.sin(0.5 * theta) ** 2
    cm1 = 2.0 * s2
    root = math.sqrt(cm1 * (cm1 + 2.0))
    if root == 0.0:
        return float(n1)  # removable limit at theta = 0
    eta = math.log1p(cm1 + root)
    half = math.sin(0.5 * n2 * theta) ** 2
    num = 2.0 * half - math.expm1(-n1 * eta) * math.cos(n2 * theta)
    return num / root


def potential_oracle(p, abs_tol: float = 1e-9) -> float:
    """Independent quadrature evaluation of the potential kernel.

    Uses the one-dimensional reduction of the Fourier integral described
    in the module docstring.  Raises :class:`OracleError` when the
    quadrature cannot certify the requested absolute tolerance.
    """
    x1, x2 = _check_point(p)
    if abs(x1) > 64 or abs(x2) > 64:
        raise DomainError("oracle is restricted to |coordinates| <= 64")
    if x1 == 0 and x2 == 0:
        return 0.0
    if abs_tol <= 0.0:
        raise DomainError("abs_tol must be positive")
    n1, n2 = sorted((abs(x1), abs(x2)), reverse=True)
    with warnings.catch_warnings():
        # roundoff chatter is redundant: the err estimate below is checked
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(
            _reduced_integrand,
            0.0,
            math.pi,
            args=(n1, n2),
            epsabs=min(abs_tol * 1e-2, 1e-11),
            epsrel=0.0,
            limit=800,
        )
    # The half in the denominator of the Fourier integrand contributes a
    # factor 2 when the first angle is integrated out: a = (2/pi) * integral.
    val *= 2.0 / math.pi
    err *= 2.0 / math.pi
    if not math.isfinite(val) or err > abs_tol:
        raise OracleError(
            f"quadrature error {err:.2e} above requested tolerance {abs_tol:.2e} at {p!r}"
        )
    return val
