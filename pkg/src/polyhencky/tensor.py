"""Small dense matrix algebra on (batches of) n x n matrices.

All functions accept a single matrix of shape ``(n, n)`` or a stack of shape
``(..., n, n)`` and broadcast over the leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DET_GUARD = 1e-300

_JACOBI_MAX_SWEEPS = 40
_JACOBI_TOL = 4.0 * np.finfo(float).eps


@dataclass(frozen=True)
class SingularSpectrum:
    """F = left @ diag(sigma) @ right.T with sigma descending and both factors in SO(n)."""

    left: np.ndarray
    sigma: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.sigma[..., None, :]) @ np.swapaxes(self.right, -1, -2)


def _as_square(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.ndim < 2 or F.shape[-1] != F.shape[-2]:
        raise DomainError(f"expected square matrices, got shape {F.shape}")
    return F


def determinant(X) -> np.ndarray | float:
    """Determinant; closed form for n = 2, 3."""
    X = _as_square(X)
    n = X.shape[-1]
    if n == 2:
        d = X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0]
    elif n == 3:
        d = (
            X[..., 0, 0] * (X[..., 1, 1] * X[..., 2, 2] - X[..., 1, 2] * X[..., 2, 1])
            - X[..., 0, 1] * (X[..., 1, 0] * X[..., 2, 2] - X[..., 1, 2] * X[..., 2, 0])
            + X[..., 0, 2] * (X[..., 1, 0] * X[..., 2, 1] - X[..., 1, 1] * X[..., 2, 0])
        )
    else:
        d = np.linalg.det(X)
    return d[()] if np.ndim(d) == 0 else d


def trace(X) -> np.ndarray | float:
    t = np.trace(_as_square(X), axis1=-2, axis2=-1)
    return t[()] if np.ndim(t) == 0 else t


def frobenius_norm(X) -> np.ndarray | float:
    X = np.asarray(X, dtype=float)
    # scale by the largest entry so that squares of huge entries do not overflow
    m = np.max(np.abs(X), axis=(-2, -1))
    safe = np.where(m > 0, m, 1.0)
    r = safe * np.sqrt(np.sum((X / safe[..., None, None]) ** 2, axis=(-2, -1)))
    r = np.where(m > 0, r, 0.0)
    return r[()] if np.ndim(r) == 0 else r


def deviatoric(X) -> np.ndarray:
    """X - (tr X / n) I."""
    X = _as_square(X)
    n = X.shape[-1]
    return X - (np.trace(X, axis1=-2, axis2=-1) / n)[..., None, None] * np.eye(n)


def symmetrize(X) -> np.ndarray:
    X = _as_square(X)
    return 0.5 * (X + np.swapaxes(X, -1, -2))


def check_gl_plus(F, guard: float = DET_GUARD) -> np.ndarray:
    """Return F as a float array, raising DomainError unless det F > guard everywhere."""
    F = _as_square(F)
    det = np.asarray(determinant(F))
    if not np.all(np.isfinite(F)):
        raise DomainError("deformation gradient has non-finite entries")
    if np.any(det <= guard):
        raise DomainError(
            f"deformation gradient not in GL+({F.shape[-1]}): det F = {det.min():.6g} <= 0"
        )
    return F


def _rotation2(angle: np.ndarray) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def _svd2(F: np.ndarray) -> SingularSpectrum:
    # Split into conformal and anti-conformal parts; F = R(phi) diag(s1, s2) R(theta).
    a, b = F[..., 0, 0], F[..., 0, 1]
    c, d = F[..., 1, 0], F[..., 1, 1]
    e, f = 0.5 * (a + d), 0.5 * (a - d)
    g, h = 0.5 * (c + b), 0.5 * (c - b)
    q, r = np.hypot(e, h), np.hypot(f, g)
    s1 = q + r
    s2 = (a * d - b * c) / s1
    a1, a2 = np.arctan2(g, f), np.arctan2(h, e)
    theta, phi = 0.5 * (a2 - a1), 0.5 * (a2 + a1)
    left = _rotation2(phi)
    right = _rotation2(-theta)
    return SingularSpectrum(left, np.stack([s1, s2], -1), right)


def _svd_jacobi(F: np.ndarray) -> SingularSpectrum:
    """One-sided (Hestenes) cyclic Jacobi, vectorised over the batch axes."""
    n = F.shape[-1]
    A = F.copy()
    V = np.broadcast_to(np.eye(n), F.shape).copy()
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for p, q in pairs:
            ap, aq = A[..., :, p], A[..., :, q]
            alpha = np.einsum("...i,...i->...", ap, ap)
            beta = np.einsum("...i,...i->...", aq, aq)
            gamma = np.einsum("...i,...i->...", ap, aq)
            active = np.abs(gamma) > _JACOBI_TOL * np.sqrt(alpha * beta)
            if not np.any(active):
                continue
            rotated = True
            g = np.where(active, gamma, 1.0)
            zeta = (beta - alpha) / (2.0 * g)
            t = np.copysign(1.0, zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            cs = np.where(active, 1.0 / np.sqrt(1.0 + t * t), 1.0)
            sn = np.where(active, cs * t, 0.0)
            cs, sn = cs[..., None], sn[..., None]
            for M in (A, V):
                mp, mq = M[..., :, p].copy(), M[..., :, q].copy()
                M[..., :, p] = cs * mp - sn * mq
                M[..., :, q] = sn * mp + cs * mq
        if not rotated:
            break
    sigma = np.sqrt(np.einsum("...ij,...ij->...j", A, A))
    order = np.argsort(-sigma, axis=-1, kind="stable")
    sigma = np.take_along_axis(sigma, order, -1)
    A = np.take_along_axis(A, order[..., None, :], -1)
    V = np.take_along_axis(V, order[..., None, :], -1)
    U = A / sigma[..., None, :]
    # det U and det V share a sign when det F > 0; flip the smallest pair to land in SO(n).
    flip = np.linalg.det(V) < 0
    if np.any(flip):
        U[flip, :, -1] *= -1.0
        V[flip, :, -1] *= -1.0
    return SingularSpectrum(U, sigma, V)


def svd(F) -> SingularSpectrum:
    """Singular value decomposition of F in GL+(n) with proper rotations as factors."""
    F = check_gl_plus(F)
    batch, n = F.shape[:-2], F.shape[-1]
    flat = F.reshape(-1, n, n)
    s = _svd2(flat) if n == 2 else _svd_jacobi(flat)
    return SingularSpectrum(
        s.left.reshape(F.shape), s.sigma.reshape(batch + (n,)), s.right.reshape(F.shape)
    )


def singular_values(F) -> np.ndarray:
    return svd(F).sigma


def _spectral_map(F, fn) -> np.ndarray:
    s = svd(F)
    V = s.right
    out = (V * fn(s.sigma)[..., None, :]) @ np.swapaxes(V, -1, -2)
    return symmetrize(out)


def stretch_tensor(F) -> np.ndarray:
    """U = sqrt(F^T F), symmetric positive definite."""
    return _spectral_map(F, lambda s: s)


def log_stretch(F) -> np.ndarray:
    """Principal logarithm log U of the stretch tensor."""
    return _spectral_map(F, np.log)
