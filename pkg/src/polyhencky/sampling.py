"""Seeded sampling of rotations, unit vectors and deformation gradients."""
from __future__ import annotations

import numpy as np


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Independent stream for one fixed-size block of samples."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(chunk)]))


def haar_rotations(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Haar-distributed elements of SO(n) via QR of Gaussian matrices."""
    Z = rng.standard_normal((count, n, n))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diagonal(R, axis1=-2, axis2=-1))[:, None, :]
    neg = np.linalg.det(Q) < 0
    Q[neg, :, 0] *= -1.0
    return Q


def unit_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def log_uniform(rng: np.random.Generator, lo: float, hi: float, size) -> np.ndarray:
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def compose(Q: np.ndarray, sigma: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Q diag(sigma) R^T."""
    return (Q * sigma[..., None, :]) @ np.swapaxes(R, -1, -2)


def random_gl_plus(
    rng: np.random.Generator, count: int, n: int, lo: float, hi: float
) -> tuple[np.ndarray, np.ndarray]:
    """Matrices with log-uniform singular values in [lo, hi] and Haar rotations."""
    sigma = log_uniform(rng, lo, hi, (count, n))
    Q = haar_rotations(rng, count, n)
    R = haar_rotations(rng, count, n)
    return compose(Q, sigma, R), sigma
