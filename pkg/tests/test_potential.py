"""Potential kernel: exact table, asymptote, and the quadrature oracle.

Closed-form anchor values used below (diagonal identity plus harmonicity):

    a(1,1) = 4/pi           a(2,0) = 4 - 8/pi      a(2,1) = 8/pi - 1
    a(2,2) = 16/(3 pi)      a(3,0) = 17 - 48/pi

Each is independently confirmed by the Fourier-integral oracle, so the
table, the closed forms, and the quadrature must all agree.
"""

import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from condwalk.errors import ConstructionError, DomainError, OracleError
from condwalk.potential import (
    DEFAULT_RADIUS,
    KAPPA,
    build_table,
    default_table,
    potential,
    potential_oracle,
    potential_radius,
)

coords = st.integers(min_value=-512, max_value=512)


def test_kappa_matches_high_precision_constant():
    """kappa = (2*euler_gamma + 3 ln 2)/pi, recomputed at 40 digits."""
    with mpmath.workdps(40):
        exact = (2 * mpmath.euler + 3 * mpmath.log(2)) / mpmath.pi
        # within one ulp of the correctly rounded double
        assert abs(KAPPA - float(exact)) < 2.5e-16
    assert abs(KAPPA - 1.0293737056545709) < 1e-15


def test_origin_and_neighbors_are_exact(table512):
    assert potential((0, 0), table512) == 0.0
    for p in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
        assert potential(p, table512) == 1.0
    # Source at the origin: the harmonicity defect is exactly 1.
    total = sum(potential(p, table512) for p in [(1, 0), (-1, 0), (0, 1), (0, -1)])
    assert total / 4.0 - potential((0, 0), table512) == 1.0


def test_closed_form_anchor_values(table512):
    anchors = {
        (1, 1): 4.0 / math.pi,
        (2, 0): 4.0 - 8.0 / math.pi,
        (2, 1): 8.0 / math.pi - 1.0,
        (2, 2): 16.0 / (3.0 * math.pi),
        (3, 0): 17.0 - 48.0 / math.pi,
    }
    for p, want in anchors.items():
        assert math.isclose(potential(p, table512), want, rel_tol=1e-13), p


def test_small_radius_tables():
    t1 = build_table(1)
    assert t1.exact_radius == 1
    assert t1.lookup((1, 0)) == 1.0
    t2 = build_table(2)
    assert math.isclose(t2.lookup((1, 1)), 4.0 / math.pi, rel_tol=1e-14)
    assert math.isclose(t2.lookup((2, 0)), 4.0 - 8.0 / math.pi, rel_tol=1e-14)
    # (2,1) lies outside the exact disk of radius 2.
    assert not t2.contains((2, 1))
    with pytest.raises(DomainError):
        t2.lookup((2, 1))


def test_build_table_rejects_bad_radii():
    for bad in (0, -3, 4097, 2.5, True):
        with pytest.raises(DomainError):
            build_table(bad)


def test_harmonicity_residual_inside_disk(table512):
    """|a(p) - mean of neighbors| stays below 1e-8 for |p| <= R-1."""
    rng = np.random.default_rng(7)
    pts = rng.integers(-361, 362, size=(400, 2))
    pts = pts[(pts**2).sum(axis=1) > 0]
    for x1, x2 in map(tuple, pts):
        nb = [(x1 + 1, x2), (x1 - 1, x2), (x1, x2 + 1), (x1, x2 - 1)]
        resid = abs(
            potential((x1, x2), table512)
            - sum(potential(q, table512) for q in nb) / 4.0
        )
        assert resid <= 1e-8
    # anchor: residual at (1,0) is pure float rounding
    resid = abs(4.0 * 1.0 - (4.0 - 8.0 / math.pi) - 0.0 - 2.0 * (4.0 / math.pi))
    assert resid < 1e-15


def test_axis_monotonicity(table512):
    axis = table512.grid[:, 0]
    assert np.all(np.diff(axis) > 0.0)


def test_crossover_error_bound_and_shrinkage():
    t8, t64 = build_table(8), build_table(64)
    assert t8.crossover_error <= 20.0 / 8**2
    assert t64.crossover_error <= 20.0 / 64**2
    assert t64.crossover_error < t8.crossover_error
    assert default_table().crossover_error < 1e-5


def test_excess_over_asymptote_is_the_diagonal_point():
    # The sup of table - asymptote is attained at (1,1) for every radius >= 2,
    # so the envelope pad is a fixed constant.
    want = 4.0 / math.pi - ((1.0 / math.pi) * math.log(2.0) + KAPPA)
    for radius in (2, 8, 64):
        t = build_table(radius)
        assert math.isclose(t.excess_over_asymptote, want, rel_tol=1e-12)
    assert build_table(1).excess_over_asymptote == 0.0


@given(coords, coords)
@settings(max_examples=80, deadline=None)
def test_eightfold_symmetry(x1, x2):
    assume(x1 * x1 + x2 * x2 <= DEFAULT_RADIUS * DEFAULT_RADIUS)
    t = default_table()
    base = potential((x1, x2), t)
    for p in [(x2, x1), (-x1, x2), (x1, -x2), (-x2, -x1), (-x1, -x2)]:
        assert potential(p, t) == base


def test_potential_outside_disk_uses_asymptote(table512):
    p = (10**6, 0)
    want = (2.0 / math.pi) * math.log(10.0**6) + KAPPA
    got = potential(p, table512)
    assert math.isclose(got, want, rel_tol=1e-15)
    assert math.isclose(got, 9.824600892207703, rel_tol=1e-12)
    # Mismatch where the table hands over to the asymptote is the stored
    # crossover error.
    edge = abs(potential((512, 0), table512) - potential_radius(512.0))
    assert edge <= table512.crossover_error


def test_potential_validates_points(table512):
    with pytest.raises(DomainError):
        potential("ab", table512)
    with pytest.raises(DomainError):
        potential((1.5, 0), table512)
    with pytest.raises(DomainError):
        potential(("a", "b"), table512)
    with pytest.raises(DomainError):
        potential((2**31, 0), table512)


def test_potential_radius_values_and_identity():
    assert potential_radius(1.0) == KAPPA
    assert math.isclose(potential_radius(math.e), 2.0 / math.pi + KAPPA, rel_tol=1e-14)
    for r in (0.5, 3.0, 123.456, 1e6):
        lhs = potential_radius(r * r)
        rhs = 2.0 * potential_radius(r) - KAPPA
        assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-12)
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            potential_radius(bad)


# --- oracle -------------------------------------------------------------------


def test_oracle_anchor_values():
    assert potential_oracle((0, 0)) == 0.0
    assert abs(potential_oracle((1, 0)) - 1.0) <= 1e-9
    assert abs(potential_oracle((1, 1)) - 4.0 / math.pi) <= 1e-9
    assert abs(potential_oracle((0, -1)) - 1.0) <= 1e-9


def test_oracle_agrees_with_table_inside_radius_20(table512):
    worst = 0.0
    for x in range(0, 21):
        for y in range(0, x + 1):
            if x * x + y * y > 400 or (x == 0 and y == 0):
                continue
            gap = abs(potential((x, y), table512) - potential_oracle((x, y)))
            worst = max(worst, gap)
    assert worst <= 1e-8


def test_oracle_domain_and_failure_modes():
    with pytest.raises(DomainError):
        potential_oracle((65, 0))
    with pytest.raises(DomainError):
        potential_oracle((1, 0), abs_tol=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy flags the unreachable tolerance
        with pytest.raises(OracleError):
            potential_oracle((40, 17), abs_tol=1e-30)


def test_construction_error_type_exists():
    assert issubclass(ConstructionError, RuntimeError)
