import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyhencky.hulls import (
    HULL_RADIUS,
    conformal_part,
    dist2_SO2,
    double_well,
    double_well_hull,
    hull_equality_region,
    rank_one_hull_dist2_SO2,
)
from polyhencky.errors import DimensionError

from .conftest import sample_F


def rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def test_conformal_part_examples():
    np.testing.assert_array_equal(conformal_part(np.eye(2)), np.eye(2))
    np.testing.assert_allclose(conformal_part(rot(0.4)), rot(0.4))
    np.testing.assert_allclose(conformal_part(np.diag([3.0, 1.0])), 2.0 * np.eye(2))


def test_conformal_part_is_an_orthogonal_projection():
    F, _ = sample_F(100, 2, seed=3)
    P = conformal_part(F)
    np.testing.assert_allclose(conformal_part(P), P)
    # the remainder is anti-conformal, hence orthogonal to P
    np.testing.assert_allclose(np.einsum("kij,kij->k", P, F - P), 0.0, atol=1e-12)


def test_hull_examples():
    assert dist2_SO2(np.eye(2)) == pytest.approx(0.0, abs=1e-30)
    assert rank_one_hull_dist2_SO2(np.eye(2)) == pytest.approx(0.0, abs=1e-30)
    F = np.diag([0.2, 0.2])
    assert not hull_equality_region(F)
    assert rank_one_hull_dist2_SO2(F) == pytest.approx(0.92, rel=1e-15)
    assert dist2_SO2(F) == pytest.approx(1.28, rel=1e-15)
    tiny = np.diag([1e-4, 1e-4])  # det = 1e-8
    assert rank_one_hull_dist2_SO2(tiny) == pytest.approx(1.0, abs=1e-7)
    assert dist2_SO2(tiny) == pytest.approx(2.0, abs=1e-3)


def test_conformal_norm_is_scaled_sum_of_singular_values():
    F, s = sample_F(1000, 2, 0.01, 5.0, seed=4)
    from polyhencky.tensor import frobenius_norm

    np.testing.assert_allclose(frobenius_norm(conformal_part(F)), s.sum(axis=1) / math.sqrt(2), rtol=1e-13)


def test_hull_dominated_by_dist2_and_gap_formula():
    F, s = sample_F(100_000, 2, 0.01, 5.0, seed=5)
    d2, hull = dist2_SO2(F), rank_one_hull_dist2_SO2(F)
    assert np.all(hull <= d2 + 1e-12 * np.maximum(1.0, d2))
    inside = ~hull_equality_region(F)
    # below the radius the gap is (s1 + s2 - 1)^2
    np.testing.assert_allclose(d2[inside] - hull[inside], (s[inside].sum(1) - 1) ** 2, atol=1e-12)


def test_hull_is_continuous_across_the_radius():
    # R(t) diag(1.3, 0.7) has conformal part R(t), of norm sqrt(2)
    for t in np.linspace(0, 2 * math.pi, 13):
        for r in (HULL_RADIUS - 1e-9, HULL_RADIUS + 1e-9):
            F = r / math.sqrt(2) * rot(t) @ np.diag([1.3, 0.7])
            assert hull_equality_region(F) == (r >= HULL_RADIUS)
            assert abs(rank_one_hull_dist2_SO2(F) - dist2_SO2(F)) < 1e-8


def test_dimension_errors():
    for fn in (conformal_part, dist2_SO2, rank_one_hull_dist2_SO2):
        with pytest.raises(DimensionError):
            fn(np.eye(3))


def test_double_well_examples():
    assert double_well(0.0) == 1.0 and double_well_hull(0.0) == 0.0
    assert double_well(1.0) == 0.0 == double_well_hull(-1.0)
    assert double_well(2.0) == 9.0 == double_well_hull(2.0)


@settings(max_examples=300, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 1))
def test_double_well_hull_convex_and_below_well(x, y, t):
    z = t * x + (1 - t) * y
    assert double_well_hull(z) <= t * double_well_hull(x) + (1 - t) * double_well_hull(y) + 1e-12
    assert double_well_hull(x) <= double_well(x)
