"""Closed-form rank-one convex hulls: dist^2(F, SO(2)) and the double well."""
from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .profiles import double_well as _well_profile, double_well_hull as _hull_profile
from .tensor import determinant, frobenius_norm, singular_values

HULL_RADIUS = np.sqrt(2.0) / 2.0


def _require_2x2(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape[-2:] != (2, 2):
        raise DimensionError(f"expected 2x2 matrices, got shape {F.shape}")
    return F


def conformal_part(F) -> np.ndarray:
    """Orthogonal projection of F onto the rotation-scaling matrices."""
    F = _require_2x2(F)
    p = 0.5 * (F[..., 0, 0] + F[..., 1, 1])
    q = 0.5 * (F[..., 0, 1] - F[..., 1, 0])
    return np.stack([np.stack([p, q], -1), np.stack([-q, p], -1)], -2)


def dist2_SO2(F):
    """Squared Euclidean distance to SO(2), sum (sigma_i - 1)^2."""
    s = singular_values(_require_2x2(F))
    r = np.sum((s - 1.0) ** 2, axis=-1)
    return r[()] if r.ndim == 0 else r


def hull_equality_region(F):
    """True where the rank-one convex hull coincides with dist^2."""
    r = frobenius_norm(conformal_part(F)) >= HULL_RADIUS
    return r


def rank_one_hull_dist2_SO2(F):
    F = _require_2x2(F)
    out = np.where(hull_equality_region(F), dist2_SO2(F), 1.0 - 2.0 * determinant(F))
    return out[()] if out.ndim == 0 else out


def double_well(x):
    return _well_profile().value(x)


def double_well_hull(x):
    return _hull_profile().value(x)
