"""Sampling-based verification: convexity, rank-one convexity, agreement, coercivity.

All scans are deterministic functions of their ScanConfig. Samples are drawn
in fixed-size chunks, each with its own RNG stream keyed by (seed, chunk
index), so reports do not depend on the number of worker threads.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .energies import EnergyModel, SpectralSumModel
from .errors import ParameterError
from .profiles import ScalarProfile
from .sampling import (
    chunk_rng,
    compose,
    haar_rotations,
    log_uniform,
    random_gl_plus,
    unit_vectors,
)
from .tensor import DET_GUARD, determinant, frobenius_norm, svd

SEGMENT_DELTA = 1e-2
AGREEMENT_TOL = 1e-10


@dataclass(frozen=True)
class ScanConfig:
    seed: int = 0
    samples: int = 10_000
    lo: float = 0.05
    hi: float = 20.0
    # second-difference step relative to (1 + ||F||)
    step: float = 1e-3
    threshold: float = 1e-8
    n: int = 3
    directions: int = 64
    chunk: int = 4096
    workers: int = 1

    def __post_init__(self):
        if not self.lo > 0:
            raise ParameterError(f"lo must be positive, got {self.lo}")
        if not self.hi > self.lo:
            raise ParameterError("need hi > lo")
        if self.samples < 1:
            raise ParameterError("samples must be >= 1")
        if not self.step > 0:
            raise ParameterError("step must be positive")
        if self.n < 2:
            raise ParameterError("dimension must be >= 2")
        if self.chunk < 1 or self.workers < 1:
            raise ParameterError("chunk and workers must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        return d


@dataclass
class Witness:
    kind: str
    value: float
    F: Optional[list] = None
    a: Optional[list] = None
    b: Optional[list] = None
    F1: Optional[list] = None
    t: Optional[float] = None
    x: Optional[float] = None
    y: Optional[float] = None
    step: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


CSV_FIELDS = ("kind", "value", "F", "a", "b", "F1", "t", "x", "y", "step")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, list):
        return " ".join(f"{x:.17g}" for x in np.ravel(v))
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


@dataclass
class ScanReport:
    kind: str
    model: str
    tested: int
    skipped: int
    violations: list
    worst_margin: float
    config: dict
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "model": self.model,
            "tested": self.tested,
            "skipped": self.skipped,
            "violations": [w.to_dict() for w in self.violations],
            "worst_margin": self.worst_margin,
            "config": self.config,
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for w in self.violations:
            writer.writerow([_fmt(getattr(w, f)) for f in CSV_FIELDS])
        return buf.getvalue()

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "VIOLATIONS"
        return (
            f"{self.kind} {self.model}: {verdict} tested={self.tested} skipped={self.skipped} "
            f"violations={len(self.violations)} worst_margin={self.worst_margin:.6g}"
        )


# ---------------------------------------------------------------------------
# batched evaluation helpers


def safe_values(model: EnergyModel, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Energy of a stack of matrices; second output marks entries that could not be used
    (det F <= guard, overflow, or non-finite value)."""
    det = determinant(F)
    bad = ~(det > DET_GUARD) | ~np.all(np.isfinite(F), axis=(-2, -1))
    G = np.where(bad[..., None, None], np.eye(F.shape[-1]), F)
    s = svd(G)
    d = np.prod(s.sigma, axis=-1)
    W = np.asarray(model.from_spectrum(s.sigma, d), dtype=float)
    bad = bad | model.overflow(s.sigma, d) | ~np.isfinite(W)
    return np.where(bad, 0.0, W), bad


def _curvature(model, F, D, h):
    """Normalised second-difference curvature of t -> W(F + t D) at 0, steps h and h/2."""
    hh = h[:, None, None]
    W0, b0 = safe_values(model, F)
    Wp, b1 = safe_values(model, F + hh * D)
    Wm, b2 = safe_values(model, F - hh * D)
    Wp2, b3 = safe_values(model, F + 0.5 * hh * D)
    Wm2, b4 = safe_values(model, F - 0.5 * hh * D)
    bad = b0 | b1 | b2 | b3 | b4
    scale = np.maximum(1.0, np.abs(W0))
    c1 = (Wp + Wm - 2.0 * W0) / (h * h) / scale
    c2 = (Wp2 + Wm2 - 2.0 * W0) / (0.25 * h * h) / scale
    # a violation needs both step sizes to agree on a negative sign
    margin = np.maximum(c1, c2)
    return np.where(bad, np.inf, margin), bad


def lh_step(F: np.ndarray, sigma_min: np.ndarray, rel: float) -> np.ndarray:
    """h = rel (1 + ||F||), capped at sigma_min / 4 so F +- h a b^T stays in GL+(n)."""
    return np.minimum(rel * (1.0 + frobenius_norm(F)), 0.25 * sigma_min)


def _run_chunks(cfg: ScanConfig, fn: Callable[[int, int], tuple]) -> list:
    nchunks = math.ceil(cfg.samples / cfg.chunk)
    sizes = [min(cfg.chunk, cfg.samples - i * cfg.chunk) for i in range(nchunks)]
    if cfg.workers == 1:
        return [fn(i, m) for i, m in enumerate(sizes)]
    with ThreadPoolExecutor(cfg.workers) as pool:
        return list(pool.map(fn, range(nchunks), sizes))


def _lh_witnesses(F, a, b, h, margin, thr, limit=50) -> list:
    idx = np.flatnonzero(margin < -thr)
    idx = idx[np.argsort(margin[idx], kind="stable")][:limit]
    return [
        Witness(
            "rank-one",
            float(margin[i]),
            F=F[i].tolist(),
            a=a[i].tolist(),
            b=b[i].tolist(),
            step=float(h[i]),
        )
        for i in idx
    ]


def _assemble(kind, model, cfg, parts, extra=None) -> ScanReport:
    tested = sum(p[0] for p in parts)
    skipped = sum(p[1] for p in parts)
    witnesses = [w for p in parts for w in p[2]]
    worst = min((p[3] for p in parts), default=math.inf)
    return ScanReport(
        kind=kind,
        model=getattr(model, "name", str(model)),
        tested=tested,
        skipped=skipped,
        violations=witnesses,
        worst_margin=float(worst),
        config=cfg.to_dict(),
        extra=extra or {},
    )


# ---------------------------------------------------------------------------
# rank-one convexity


def rank_one_convexity_scan(
    model: EnergyModel, config: ScanConfig = ScanConfig(), directed: bool = False
) -> ScanReport:
    """Legendre-Hadamard test along random rank-one lines through random F."""
    if directed:
        return directed_lh_search(model, config)
    n, thr = config.n, config.threshold

    def chunk(i, m):
        rng = chunk_rng(config.seed, i)
        F, sigma = random_gl_plus(rng, m, n, config.lo, config.hi)
        a = unit_vectors(rng, m, n)
        b = unit_vectors(rng, m, n)
        h = lh_step(F, sigma.min(axis=-1), config.step)
        margin, bad = _curvature(model, F, a[:, :, None] * b[:, None, :], h)
        ok = ~bad
        worst = float(margin[ok].min()) if ok.any() else math.inf
        return int(ok.sum()), int(bad.sum()), _lh_witnesses(F, a, b, h, margin, thr), worst

    return _assemble("rank-one", model, config, _run_chunks(config, chunk))


def _direction_set(n: int) -> np.ndarray:
    eye = np.eye(n)
    vecs = [eye[i] for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        vecs.append((eye[i] + eye[j]) / math.sqrt(2.0))
        vecs.append((eye[i] - eye[j]) / math.sqrt(2.0))
    return np.array(vecs)


def _pack(logs, a, b):
    return np.concatenate([logs, a, b])


def directed_lh_search(
    model: EnergyModel, config: ScanConfig = ScanConfig(), grid: int = 7, iterations: int = 200
) -> ScanReport:
    """Coordinate descent on the LH curvature at diagonal F, started from a coarse grid.

    Searches singular values in [lo, hi] (log scale) and both direction vectors.
    """
    n, thr = config.n, config.threshold
    axis = np.geomspace(config.lo, config.hi, grid)
    tuples = np.array(list(itertools.combinations_with_replacement(axis[::-1], n)))
    dirs = _direction_set(n)
    rng = chunk_rng(config.seed, 0)
    extra_a = unit_vectors(rng, config.directions, n)
    extra_b = unit_vectors(rng, config.directions, n)
    pairs_a = np.concatenate([np.repeat(dirs, len(dirs), 0), extra_a])
    pairs_b = np.concatenate([np.tile(dirs, (len(dirs), 1)), extra_b])

    S = np.repeat(tuples, len(pairs_a), 0)
    A = np.tile(pairs_a, (len(tuples), 1))
    B = np.tile(pairs_b, (len(tuples), 1))

    def evaluate(S, A, B):
        F = np.zeros(S.shape + (n,))
        idx = np.arange(n)
        F[:, idx, idx] = S
        h = lh_step(F, S.min(axis=-1), config.step)
        m, _ = _curvature(model, F, A[:, :, None] * B[:, None, :], h)
        return m, F, h

    margin, _, _ = evaluate(S, A, B)
    start = int(np.argmin(margin))
    x = _pack(np.log(S[start]), A[start], B[start])
    best = float(margin[start])
    steps = np.concatenate([np.full(n, 0.25), np.full(2 * n, 0.25)])
    lo, hi = math.log(config.lo), math.log(config.hi)

    def unpack(x):
        logs = np.clip(x[:n], lo, hi)
        a = x[n : 2 * n] / np.linalg.norm(x[n : 2 * n])
        b = x[2 * n :] / np.linalg.norm(x[2 * n :])
        return logs, a, b

    for _ in range(iterations):
        # every single-coordinate move, evaluated as one batch
        cands = []
        for k in range(len(x)):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[k] += sgn * steps[k]
                cands.append(_pack(*unpack(y)))
        C = np.array(cands)
        m, _, _ = evaluate(np.exp(C[:, :n]), C[:, n : 2 * n], C[:, 2 * n :])
        j = int(np.argmin(m))
        if m[j] < best:
            best, x = float(m[j]), C[j]
        else:
            steps = steps * 0.5
            if steps.max() < 1e-6:
                break

    logs, a, b = unpack(x)
    m, F, h = evaluate(np.exp(logs)[None], a[None], b[None])
    witnesses = _lh_witnesses(F, a[None], b[None], h, m, thr)
    tested = len(S) + 1
    return ScanReport(
        kind="rank-one-directed",
        model=model.name,
        tested=tested,
        skipped=0,
        violations=witnesses,
        worst_margin=float(m[0]),
        config=config.to_dict(),
        extra={"start_margin": float(margin[start])},
    )


def verify_lh_witness(model: EnergyModel, w: Witness) -> bool:
    """Recompute a rank-one witness through LAPACK's SVD at steps h, h/2 and h/4."""
    F = np.array(w.F)
    D = np.outer(w.a, w.b)

    def energy(X):
        s = np.linalg.svd(X, compute_uv=False)
        return float(model.from_spectrum(s[None], np.array([np.linalg.det(X)]))[0])

    W0 = energy(F)
    for h in (w.step, w.step / 2, w.step / 4):
        if np.linalg.det(F - h * D) <= 0:
            return False
        if energy(F + h * D) + energy(F - h * D) - 2.0 * W0 >= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# convexity along arbitrary segments


def segment_convexity_scan(
    model: EnergyModel, config: ScanConfig = ScanConfig(), points: int = 8
) -> ScanReport:
    """Second differences of t -> sum phi(sigma_i(F0 + t (F1 - F0))) at sampled t in (0, 1).

    For a SpectralSumModel only the convex part (no log or volumetric term) is tested.
    """
    target = model.spectral_part() if isinstance(model, SpectralSumModel) else model
    n, thr, d = config.n, config.threshold, SEGMENT_DELTA

    def chunk(i, m):
        rng = chunk_rng(config.seed, i)
        F0, _ = random_gl_plus(rng, m, n, config.lo, config.hi)
        F1, _ = random_gl_plus(rng, m, n, config.lo, config.hi)
        t = rng.uniform(d, 1.0 - d, (m, points))
        D = (F1 - F0)[:, None]
        P = F0[:, None] + t[..., None, None] * D
        vals, bads = [], []
        for off in (0.0, d, -d, 0.5 * d, -0.5 * d):
            v, b = safe_values(target, P + off * D)
            vals.append(v)
            bads.append(b)
        bad = np.any(bads, axis=0).any(axis=-1)
        W0 = vals[0]
        scale = np.maximum(1.0, np.abs(W0))
        c1 = (vals[1] + vals[2] - 2 * W0) / d**2 / scale
        c2 = (vals[3] + vals[4] - 2 * W0) / (0.25 * d**2) / scale
        margin = np.maximum(c1, c2)
        margin[bad] = np.inf
        per_seg = margin.min(axis=-1)
        arg = margin.argmin(axis=-1)
        ok = ~bad
        witnesses = []
        idx = np.flatnonzero(per_seg < -thr)
        for k in idx[np.argsort(per_seg[idx], kind="stable")][:50]:
            witnesses.append(
                Witness(
                    "segment",
                    float(per_seg[k]),
                    F=F0[k].tolist(),
                    F1=F1[k].tolist(),
                    t=float(t[k, arg[k]]),
                    step=d,
                )
            )
        worst = float(per_seg[ok].min()) if ok.any() else math.inf
        return int(ok.sum()), int(bad.sum()), witnesses, worst

    return _assemble("segment", target, config, _run_chunks(config, chunk))


def verify_segment_witness(model: EnergyModel, w: Witness) -> bool:
    target = model.spectral_part() if isinstance(model, SpectralSumModel) else model
    F0, F1 = np.array(w.F), np.array(w.F1)

    def g(t):
        X = F0 + t * (F1 - F0)
        s = np.linalg.svd(X, compute_uv=False)
        return float(target.from_spectrum(s[None], np.array([np.linalg.det(X)]))[0])

    for d in (w.step, w.step / 2, w.step / 4):
        if g(w.t + d) + g(w.t - d) - 2.0 * g(w.t) >= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# scalar profiles


def scalar_convexity_check(
    f: ScalarProfile | Callable,
    interval: tuple[float, float],
    config: ScanConfig = ScanConfig(samples=1000, threshold=1e-10),
    monotone: bool = False,
    mono_tol: float = 1e-12,
) -> ScanReport:
    """Midpoint convexity, grid second differences and (optionally) first differences."""
    fn = f.value if isinstance(f, ScalarProfile) else f
    lo, hi = interval
    thr = config.threshold
    rng = chunk_rng(config.seed, 0)
    x = np.linspace(lo, hi, config.samples + 2)
    y = fn(x)
    scale = np.maximum(1.0, np.abs(y))
    witnesses = []

    d2 = (y[:-2] - 2 * y[1:-1] + y[2:]) / scale[1:-1]
    for i in np.flatnonzero(d2 < -thr)[:50]:
        witnesses.append(Witness("second-difference", float(d2[i]), x=float(x[i + 1]),
                                 step=float(x[1] - x[0])))

    p = rng.uniform(lo, hi, config.samples)
    q = rng.uniform(lo, hi, config.samples)
    fm, fp, fq = fn(0.5 * (p + q)), fn(p), fn(q)
    mid = (0.5 * (fp + fq) - fm) / np.maximum(1.0, np.abs(fm))
    for i in np.flatnonzero(mid < -thr)[:50]:
        witnesses.append(Witness("midpoint", float(mid[i]), x=float(p[i]), y=float(q[i])))

    margins = [d2.min(), mid.min()]
    if monotone:
        d1 = np.diff(y) / scale[:-1]
        for i in np.flatnonzero(d1 < -mono_tol)[:50]:
            witnesses.append(Witness("first-difference", float(d1[i]), x=float(x[i])))
        margins.append(d1.min())

    name = getattr(f, "name", getattr(f, "__name__", "f"))
    return ScanReport(
        kind="scalar-convexity",
        model=name,
        tested=len(d2) + len(mid),
        skipped=0,
        violations=witnesses,
        worst_margin=float(min(margins)),
        config=config.to_dict(),
        extra={"interval": [lo, hi], "monotone": monotone},
    )


# ---------------------------------------------------------------------------
# ellipticity map on a grid of diagonal matrices


@dataclass
class EllipticityMap:
    axis: np.ndarray
    n: int
    violation: np.ndarray  # bool, shape (len(axis),) * n
    margin: np.ndarray
    witnesses: list
    config: dict

    @property
    def violations_found(self) -> int:
        return int(self.violation.sum())

    def to_dict(self) -> dict:
        return {
            "axis": self.axis.tolist(),
            "n": self.n,
            "cells": int(self.violation.size),
            "violations_found": self.violations_found,
            "worst_margin": float(self.margin.min()),
            "violating_cells": [list(map(int, c)) for c in np.argwhere(self.violation)],
            "witnesses": [w.to_dict() for w in self.witnesses],
            "config": self.config,
        }

    def to_report(self, model_name: str) -> ScanReport:
        return ScanReport(
            kind="ellipticity",
            model=model_name,
            tested=int(self.violation.size),
            skipped=0,
            violations=self.witnesses,
            worst_margin=float(self.margin.min()),
            config=self.config,
            extra={"cells_with_violation": self.violations_found},
        )


def ellipticity_probe(
    model: EnergyModel,
    grid: tuple[float, float, int],
    config: ScanConfig = ScanConfig(),
    log_spacing: bool = False,
) -> EllipticityMap:
    """LH test at F = diag(l_1, ..., l_n) for every grid cell over `config.directions`
    random rank-one directions per cell."""
    lo, hi, count = grid
    n, m, thr = config.n, config.directions, config.threshold
    axis = np.geomspace(lo, hi, count) if log_spacing else np.linspace(lo, hi, count)
    cells = np.array(list(itertools.product(range(count), repeat=n)))
    ncell = len(cells)
    per_chunk = max(1, config.chunk // m)
    margins = np.empty(ncell)
    witnesses = []
    idx = np.arange(n)
    for ci, start in enumerate(range(0, ncell, per_chunk)):
        block = cells[start : start + per_chunk]
        k = len(block)
        rng = chunk_rng(config.seed, ci)
        a = unit_vectors(rng, k * m, n)
        b = unit_vectors(rng, k * m, n)
        lam = np.repeat(axis[block], m, 0)
        F = np.zeros((k * m, n, n))
        F[:, idx, idx] = lam
        h = lh_step(F, lam.min(axis=-1), config.step)
        margin, _ = _curvature(model, F, a[:, :, None] * b[:, None, :], h)
        margin = margin.reshape(k, m)
        margins[start : start + k] = margin.min(axis=1)
        witnesses += _lh_witnesses(
            F, a, b, h, margin.reshape(-1), thr, limit=max(0, 50 - len(witnesses))
        )
    shape = (count,) * n
    margins = margins.reshape(shape)
    return EllipticityMap(axis, n, margins < -thr, margins, witnesses, config.to_dict())


# ---------------------------------------------------------------------------
# agreement and coercivity


def relative_discrepancy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a - b| / |b|, with |b| floored at the smallest normal double."""
    return np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)


def extension_agreement_check(
    original: EnergyModel,
    extension: EnergyModel,
    region: Optional[tuple[float, float]] = None,
    config: ScanConfig = ScanConfig(),
    tol: float = AGREEMENT_TOL,
) -> ScanReport:
    """Compare two models on matrices with all singular values inside `region`."""
    if region is None:
        region = extension.agreement
        if region is None:
            raise ParameterError(f"{extension.name} has no agreement region; pass one")
    lo, hi = region
    hi = min(hi, config.hi)
    if not 0 < lo < hi:
        raise ParameterError(f"empty agreement region ({lo}, {hi})")
    n = config.n

    def chunk(i, m):
        rng = chunk_rng(config.seed, i)
        F, _ = random_gl_plus(rng, m, n, lo, hi)
        a, bad_a = safe_values(original, F)
        b, bad_b = safe_values(extension, F)
        bad = bad_a | bad_b
        rel = relative_discrepancy(b, a)
        margin = np.where(bad, np.inf, tol - rel)
        idx = np.flatnonzero(margin < 0)[:50]
        wit = [Witness("agreement", float(rel[k]), F=F[k].tolist()) for k in idx]
        ok = ~bad
        worst = float(margin[ok].min()) if ok.any() else math.inf
        return int(ok.sum()), int(bad.sum()), wit, worst

    parts = _run_chunks(config, chunk)
    rep = _assemble("agreement", extension, config, parts)
    rep.model = f"{original.name} vs {extension.name}"
    rep.extra = {"region": [lo, hi], "tol": tol, "max_discrepancy": tol - rep.worst_margin}
    return rep


def coercivity_lower_bound(lam_max: np.ndarray, mu: float, n: int) -> np.ndarray:
    """mu * (sum of the worst-case profile terms) for the gamma = 1/3 extension.

    (n-1) singular values sit at the constant branch -4/9, the largest on the
    exponential branch, and ln det F <= n ln(lam_max). For n = 3 this is
    -1/3 + (2/e^(1/3)) (e^(lam_max - e^(1/3)) - 1) - 4 ln(lam_max).
    """
    c = math.exp(1.0 / 3.0)
    top = -1.0 / 9.0 + 2.0 / 3.0 + (2.0 / c) * np.expm1(lam_max - c)
    return mu * (-(n - 1) * 4.0 / 9.0 + top - (4.0 / 3.0) * n * np.log(lam_max))


def coercivity_check(
    model: SpectralSumModel,
    config: ScanConfig = ScanConfig(lo=0.05, hi=700.0, samples=1000),
    dominance_norm: float = 50.0,
    powers: Sequence[float] = (1.0, 2.0, 4.0),
) -> ScanReport:
    """Check the explicit exponential lower bound and ||F||^4 dominance of the Hencky extension.

    Samples draw lam_max log-uniformly from (e^(1/3), hi) and the remaining
    singular values from [lo, lam_max]. Samples whose value overflowed are
    flagged and not counted.
    """
    if model.name != "hencky-ext":
        raise ParameterError("coercivity check applies to the Hencky extension only")
    mu = model.params["mu"]
    n = config.n
    cmin = math.exp(1.0 / 3.0)

    def chunk(i, m):
        rng = chunk_rng(config.seed, i)
        lam_max = log_uniform(rng, cmin, config.hi, m)
        lam_max = np.maximum(lam_max, np.nextafter(cmin, np.inf))
        rest = np.exp(rng.uniform(math.log(config.lo), np.log(lam_max)[:, None], (m, n - 1)))
        sigma = np.concatenate([lam_max[:, None], rest], axis=1)
        Q = haar_rotations(rng, m, n)
        R = haar_rotations(rng, m, n)
        F = compose(Q, sigma, R)
        W, bad = safe_values(model, F)
        bound = coercivity_lower_bound(lam_max, mu, n)
        norm = frobenius_norm(F)
        scale = np.maximum(1.0, np.abs(bound))
        # exp(lam_max) amplifies the O(eps * lam_max) error of the recovered singular
        # value into a relative error of the same size
        m1 = (W - bound) / scale + 16.0 * np.finfo(float).eps * lam_max
        # a value above the dominance target is fine even when saturated
        m2 = np.where(norm >= dominance_norm, (W - norm**4) / np.maximum(1.0, norm**4), np.inf)
        margin = np.where(bad, np.inf, np.minimum(m1, m2))
        wit = []
        for k in np.flatnonzero(margin < 0)[:50]:
            kind = "lower-bound" if m1[k] < 0 else "dominance"
            wit.append(Witness(kind, float(margin[k]), F=F[k].tolist()))
        ok = ~bad
        worst = float(margin[ok].min()) if ok.any() else math.inf
        return int(ok.sum()), int(bad.sum()), wit, worst, int((norm >= dominance_norm)[ok].sum())

    parts = _run_chunks(config, chunk)
    rep = _assemble("coercivity", model, config, [p[:4] for p in parts])
    rep.extra["dominance_samples"] = sum(p[4] for p in parts)

    # growth along rays: W(tF)/||tF||^p for increasing t
    rng = chunk_rng(config.seed, 10**6)
    F0, _ = random_gl_plus(rng, 8, n, 0.5, 2.0)
    F0 = F0 / frobenius_norm(F0)[:, None, None]
    norms = np.array([10.0, 25.0, 50.0, 100.0])
    rays = {}
    for p in powers:
        ratios = []
        for r in norms:
            W, bad = safe_values(model, r * F0)
            ratios.append(np.where(bad, np.inf, W / r**p))
        ratios = np.array(ratios)
        grows = bool(np.all(ratios[2:] >= ratios[1:-1]) and np.all(ratios[-1] > 1e3))
        rays[str(p)] = {"min_final_ratio": float(ratios[-1].min()), "increasing": grows}
        if not grows:
            rep.violations.append(Witness("ray-growth", float(ratios[-1].min()), step=p))
    rep.extra["rays"] = rays
    return rep
