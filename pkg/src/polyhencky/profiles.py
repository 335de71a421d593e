"""Piecewise scalar functions of one variable with value/derivative evaluators.

A breakpoint belongs to the piece on its right; derivatives there are the
right-hand derivatives. Values of every profile built here agree at the
breakpoints, so the convention only shows up in the derivatives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConstructionError, DomainError, ParameterError

EXP_LIMIT = 700.0

Fn = Callable[[np.ndarray], np.ndarray]


def exp_saturated(x):
    """exp(x) with the argument clipped at EXP_LIMIT so the result stays finite."""
    return np.exp(np.minimum(x, EXP_LIMIT))


@dataclass(frozen=True)
class Piece:
    value: Fn
    d1: Fn
    d2: Fn


def _const(c: float) -> Piece:
    return Piece(
        lambda x: np.full_like(x, c),
        lambda x: np.zeros_like(x),
        lambda x: np.zeros_like(x),
    )


def _affine(x0: float, y0: float, slope: float) -> Piece:
    return Piece(
        lambda x: y0 + slope * (x - x0),
        lambda x: np.full_like(x, slope),
        lambda x: np.zeros_like(x),
    )


@dataclass(frozen=True)
class ScalarProfile:
    name: str
    breakpoints: tuple[float, ...]
    pieces: tuple[Piece, ...]
    positive_domain: bool = True
    # exp() inside some piece saturates for arguments beyond this point
    saturation: float = math.inf
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ConstructionError("need exactly one more piece than breakpoints")
        if any(b >= c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
            raise ConstructionError("breakpoints must be strictly ascending")

    def _eval(self, x, which: str):
        arr = np.asarray(x, dtype=float)
        if self.positive_domain and np.any(arr <= 0.0):
            raise DomainError(f"{self.name}: argument must be positive")
        flat = arr.reshape(-1)
        idx = np.searchsorted(np.asarray(self.breakpoints), flat, side="right")
        out = np.empty_like(flat)
        for i, piece in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                out[m] = getattr(piece, which)(flat[m])
        out = out.reshape(arr.shape)
        return out[()] if out.ndim == 0 else out

    def __call__(self, x):
        return self._eval(x, "value")

    def value(self, x):
        return self._eval(x, "value")

    def d1(self, x):
        return self._eval(x, "d1")

    def d2(self, x):
        return self._eval(x, "d2")

    def saturated(self, x) -> np.ndarray:
        return np.asarray(x) > self.saturation

    def one_sided(self, x: float) -> tuple[float, float]:
        """Left and right first derivatives at x."""
        idx = int(np.searchsorted(np.asarray(self.breakpoints), x, side="right"))
        xs = np.array([float(x)])
        right = float(self.pieces[idx].d1(xs)[0])
        if idx > 0 and self.breakpoints[idx - 1] == x:
            left = float(self.pieces[idx - 1].d1(xs)[0])
        else:
            left = right
        return left, right

    def kinks(self, tol: float = 1e-9) -> tuple[float, ...]:
        """Breakpoints at which the first derivative jumps."""
        out = []
        for b in self.breakpoints:
            left, right = self.one_sided(b)
            if abs(left - right) > tol * max(1.0, abs(left), abs(right)):
                out.append(b)
        return tuple(out)

    def near_kink(self, x, tol: float = 1e-9) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        hit = np.zeros(x.shape, dtype=bool)
        for k in self.kinks():
            hit |= np.abs(x - k) <= tol * max(1.0, abs(k))
        return hit


def phi_alpha(alpha: float) -> ScalarProfile:
    """Convex nondecreasing profile extending a*l^2 - 2l + 1 below l = 1/(2a)."""
    if not 0.5 < alpha <= 1.0:
        raise ParameterError(f"alpha must lie in (1/2, 1], got {alpha}")
    a = float(alpha)
    lb = 1.0 / (2.0 * a)
    c = 1.0 / (2.0 * a)
    const = 1.0 - 0.75 / a + c * math.log(lb)
    upper = Piece(
        lambda x: a * x * x - 2.0 * x + 1.0 + c * np.log(x),
        lambda x: 2.0 * a * x - 2.0 + c / x,
        lambda x: 2.0 * a - c / (x * x),
    )
    return ScalarProfile(
        f"phi_alpha({a:g})", (lb,), (_const(const), upper), params={"alpha": a}
    )


def phi_gamma(gamma: float) -> ScalarProfile:
    """Convex nondecreasing profile extending ln^2(l) + (2 - 2g) ln(l) outside (e^(g-1), e^g)."""
    if gamma > 1.0:
        raise ParameterError(f"gamma must be <= 1, got {gamma}")
    g = float(gamma)
    lo, hi = math.exp(g - 1.0), math.exp(g)
    b = 2.0 - 2.0 * g
    middle = Piece(
        lambda x: np.log(x) ** 2 + b * np.log(x),
        lambda x: (2.0 * np.log(x) + b) / x,
        lambda x: (2.0 * g - 2.0 * np.log(x)) / (x * x),
    )
    k = 2.0 / hi
    upper = Piece(
        lambda x: -g * g + 2.0 * g + k * (exp_saturated(x - hi) - 1.0),
        lambda x: k * exp_saturated(x - hi),
        lambda x: k * exp_saturated(x - hi),
    )
    return ScalarProfile(
        f"phi_gamma({g:g})",
        (lo, hi),
        (_const(-((g - 1.0) ** 2)), middle, upper),
        saturation=hi + EXP_LIMIT,
        params={"gamma": g},
    )


def psi_vol(Lambda: float) -> ScalarProfile:
    """Volumetric profile: (L/2) ln^2 t up to t = e, exponential growth beyond."""
    if Lambda < 0:
        raise ParameterError(f"Lambda must be >= 0, got {Lambda}")
    L = float(Lambda)
    e = math.e
    if L == 0.0:
        return ScalarProfile("psi(0)", (e,), (_const(0.0), _const(0.0)), params={"Lambda": 0.0})
    lower = Piece(
        lambda t: 0.5 * L * np.log(t) ** 2,
        lambda t: L * np.log(t) / t,
        lambda t: L * (1.0 - np.log(t)) / (t * t),
    )
    upper = Piece(
        lambda t: 0.5 * L + (L / e) * (exp_saturated(t - e) - 1.0),
        lambda t: (L / e) * exp_saturated(t - e),
        lambda t: (L / e) * exp_saturated(t - e),
    )
    return ScalarProfile(
        f"psi({L:g})", (e,), (lower, upper), saturation=e + EXP_LIMIT, params={"Lambda": L}
    )


def log_squared() -> ScalarProfile:
    """w(l) = ln^2(l)."""
    return ScalarProfile(
        "log_squared",
        (),
        (
            Piece(
                lambda x: np.log(x) ** 2,
                lambda x: 2.0 * np.log(x) / x,
                lambda x: (2.0 - 2.0 * np.log(x)) / (x * x),
            ),
        ),
    )


def quadratic() -> ScalarProfile:
    """w(l) = (l - 1)^2."""
    return ScalarProfile(
        "quadratic",
        (),
        (
            Piece(
                lambda x: (x - 1.0) ** 2,
                lambda x: 2.0 * (x - 1.0),
                lambda x: np.full_like(x, 2.0),
            ),
        ),
    )


def double_well() -> ScalarProfile:
    return ScalarProfile(
        "double_well",
        (),
        (
            Piece(
                lambda x: (x * x - 1.0) ** 2,
                lambda x: 4.0 * x * (x * x - 1.0),
                lambda x: 12.0 * x * x - 4.0,
            ),
        ),
        positive_domain=False,
    )


def double_well_hull() -> ScalarProfile:
    well = double_well().pieces[0]
    # (-1, 1) is open, the outer branch owns x = 1; at x = -1 both branches give 0
    return ScalarProfile(
        "double_well_hull",
        (-1.0, 1.0),
        (well, _const(0.0), well),
        positive_domain=False,
    )


def _sample_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.linspace(lo, hi, count)


def convex_extend_scalar(
    g: ScalarProfile, a: float, b: float, samples: int = 1000, tol: float = 1e-10
) -> ScalarProfile:
    """Continue a profile convex on [a, b] by its tangent lines at a and b.

    Raises ConstructionError if sampled second differences on [a, b] show
    non-convexity.
    """
    if not 0.0 < a < b:
        raise ConstructionError(f"need 0 < a < b, got [{a}, {b}]")
    x = _sample_grid(a, b, samples)
    y = g.value(x)
    d2 = y[:-2] - 2.0 * y[1:-1] + y[2:]
    scale = np.maximum(1.0, np.abs(y[1:-1]))
    if np.any(d2 < -tol * scale):
        i = int(np.argmin(d2 / scale))
        raise ConstructionError(
            f"{g.name} is not convex on [{a}, {b}]: second difference {d2[i]:.3e} at {x[i + 1]:.6g}"
        )
    ga, gb = float(g.value(np.array([a]))[0]), float(g.value(np.array([b]))[0])
    sa, sb = float(g.d1(np.array([a]))[0]), float(g.d1(np.array([b]))[0])
    inner = Piece(g.value, g.d1, g.d2)
    return ScalarProfile(
        f"convex_ext({g.name})",
        (a, b),
        (_affine(a, ga, sa), inner, _affine(b, gb, sb)),
        positive_domain=True,
        saturation=g.saturation,
        params={"a": a, "b": b},
    )


def valanis_landel_profile(w: ScalarProfile, eps: float) -> tuple[ScalarProfile, float]:
    """Three-branch profile of the Valanis-Landel extension and its log coefficient."""
    w2 = float(w.d2(np.array([1.0]))[0])
    c = w2 / 8.0
    lo, hi = 1.0 - eps, 1.0 + eps
    const = float(w.value(np.array([lo]))[0]) + c * math.log(lo)
    top = float(w.value(np.array([hi]))[0]) + c * math.log(hi)
    slope = float(w.d1(np.array([hi]))[0]) + c / hi
    middle = Piece(
        lambda x: w.value(x) + c * np.log(x),
        lambda x: w.d1(x) + c / x,
        lambda x: w.d2(x) - c / (x * x),
    )
    profile = ScalarProfile(
        f"vl({w.name}, eps={eps:.6g})",
        (lo, hi),
        (_const(const), middle, _affine(hi, top, slope)),
        params={"epsilon": eps},
    )
    return profile, c
