"""Isotropic energy functions of the deformation gradient.

Every model evaluates through the singular values of F, so the same code
serves single matrices and stacks of shape ``(..., n, n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import profiles as pf
from .errors import ConstructionError, ParameterError
from .tensor import check_gl_plus, deviatoric, frobenius_norm, log_stretch, svd, trace


@dataclass(frozen=True)
class LameParameters:
    """Shear modulus ``mu`` and first Lame parameter ``lam``; kappa = lam + 2 mu / n."""

    mu: float
    lam: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError(f"shear modulus must be positive, got {self.mu}")

    @classmethod
    def from_kappa(cls, mu: float, kappa: float, n: int) -> "LameParameters":
        return cls(mu, kappa - 2.0 * mu / n)

    def kappa(self, n: int) -> float:
        return self.lam + 2.0 * self.mu / n


@dataclass(frozen=True)
class ExpHenckyParameters:
    mu: float
    kappa: float
    k: float
    k_hat: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError("mu must be positive")
        if not (self.k > 0 and self.k_hat > 0):
            raise ParameterError("k and k_hat must be positive")


class EnergyModel:
    """Base class: W(F) as a symmetric function of the singular values."""

    name: str = "model"
    # singular-value box (lo, hi) on which an extension reproduces its original
    agreement: Optional[tuple[float, float]] = None

    def from_spectrum(self, sigma: np.ndarray, det: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dsigma(self, sigma: np.ndarray, det: np.ndarray) -> np.ndarray:
        """Partial derivatives with respect to each singular value (det treated as prod sigma)."""
        raise NotImplementedError

    def overflow(self, sigma: np.ndarray, det: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(det), dtype=bool)

    def kink(self, sigma: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(sigma)[:-1], dtype=bool)

    def evaluate(self, F):
        """Return (W, overflow_flag)."""
        s = svd(F)
        det = np.prod(s.sigma, axis=-1)
        return _scalar(self.from_spectrum(s.sigma, det)), _scalar(self.overflow(s.sigma, det))

    def value(self, F):
        return self.evaluate(F)[0]

    __call__ = value

    def gradient(self, F) -> np.ndarray:
        """dW/dF = left @ diag(dW/dsigma) @ right.T."""
        s = svd(F)
        det = np.prod(s.sigma, axis=-1)
        ds = self.dsigma(s.sigma, det)
        return (s.left * ds[..., None, :]) @ np.swapaxes(s.right, -1, -2)


def _scalar(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


@dataclass(eq=False)
class SpectralSumModel(EnergyModel):
    """W(F) = weight * sum phi(sigma_i) - log_coeff * ln det F + volumetric(det F)."""

    profile: pf.ScalarProfile
    weight: float = 1.0
    log_coeff: float = 0.0
    volumetric: Optional[pf.ScalarProfile] = None
    name: str = "spectral-sum"
    agreement: Optional[tuple[float, float]] = None
    params: dict = field(default_factory=dict)

    def from_spectrum(self, sigma, det):
        w = self.weight * np.sum(self.profile.value(sigma), axis=-1)
        if self.log_coeff:
            w = w - self.log_coeff * np.log(det)
        if self.volumetric is not None:
            w = w + self.volumetric.value(det)
        return w

    def dsigma(self, sigma, det):
        d = self.weight * self.profile.d1(sigma)
        # d/dsigma_i of g(det) is g'(det) det / sigma_i
        vol = -self.log_coeff * np.ones_like(det)
        if self.volumetric is not None:
            vol = vol + self.volumetric.d1(det) * det
        return d + vol[..., None] / sigma

    def overflow(self, sigma, det):
        flag = np.any(self.profile.saturated(sigma), axis=-1)
        if self.volumetric is not None:
            flag = flag | self.volumetric.saturated(det)
        return flag

    def kink(self, sigma):
        flag = np.any(self.profile.near_kink(sigma), axis=-1)
        if self.volumetric is not None:
            flag = flag | self.volumetric.near_kink(np.prod(sigma, axis=-1))
        return flag

    def spectral_part(self) -> "SpectralSumModel":
        """The convex part F -> sum phi(sigma_i) alone."""
        return SpectralSumModel(self.profile, name=f"sum {self.profile.name}")


@dataclass(eq=False)
class ClosedFormModel(EnergyModel):
    """General symmetric function of the singular values with its partial derivatives."""

    fn: Callable[[np.ndarray], np.ndarray]
    dfn: Callable[[np.ndarray], np.ndarray]
    name: str = "closed-form"
    params: dict = field(default_factory=dict)
    overflow_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def from_spectrum(self, sigma, det):
        return self.fn(sigma)

    def dsigma(self, sigma, det):
        return self.dfn(sigma)

    def overflow(self, sigma, det):
        if self.overflow_fn is None:
            return super().overflow(sigma, det)
        return self.overflow_fn(sigma)


def isotropic_gradient(model: EnergyModel, F, with_kink: bool = False):
    """First Piola-Kirchhoff-type gradient dW/dF.

    With ``with_kink=True`` also returns a flag marking matrices with a
    singular value at a kink of the profile; the gradient there uses
    right-hand derivatives.
    """
    G = model.gradient(F)
    if not with_kink:
        return G
    return G, _scalar(model.kink(svd(F).sigma))


# ---------------------------------------------------------------------------
# Logarithmic strain measures and the classical energies


def log_strain_measures(F) -> tuple:
    """(||dev log U||^2, ||log U||^2, [tr log U]^2)."""
    L = log_stretch(F)
    return (
        frobenius_norm(deviatoric(L)) ** 2,
        frobenius_norm(L) ** 2,
        trace(L) ** 2,
    )


def hencky_energy(F, p: LameParameters):
    """mu ||dev log U||^2 + (kappa/2) [tr log U]^2."""
    F = check_gl_plus(F)
    n = F.shape[-1]
    dev2, _, tr2 = log_strain_measures(F)
    return p.mu * dev2 + 0.5 * p.kappa(n) * tr2


def exp_hencky_energy(F, p: ExpHenckyParameters):
    dev2, _, tr2 = log_strain_measures(F)
    return p.mu / p.k * np.exp(p.k * dev2) + p.kappa / (2.0 * p.k_hat) * np.exp(p.k_hat * tr2)


def hencky_model(p: LameParameters) -> ClosedFormModel:
    mu, lam = p.mu, p.lam

    def fn(s):
        ell = np.log(s)
        return mu * np.sum(ell * ell, axis=-1) + 0.5 * lam * np.sum(ell, axis=-1) ** 2

    def dfn(s):
        ell = np.log(s)
        return (2.0 * mu * ell + lam * np.sum(ell, axis=-1, keepdims=True)) / s

    return ClosedFormModel(fn, dfn, name="hencky", params={"mu": mu, "lambda": lam})


def exp_hencky_model(p: ExpHenckyParameters) -> ClosedFormModel:
    mu, kappa, k, kh = p.mu, p.kappa, p.k, p.k_hat

    def parts(s):
        ell = np.log(s)
        dev = ell - ell.mean(axis=-1, keepdims=True)
        tr = ell.sum(axis=-1)
        return ell, dev, tr

    def fn(s):
        _, dev, tr = parts(s)
        return mu / k * pf.exp_saturated(k * np.sum(dev * dev, -1)) + kappa / (
            2.0 * kh
        ) * pf.exp_saturated(kh * tr * tr)

    def dfn(s):
        _, dev, tr = parts(s)
        a = 2.0 * mu * pf.exp_saturated(k * np.sum(dev * dev, -1))[..., None] * dev
        b = (kappa * tr * pf.exp_saturated(kh * tr * tr))[..., None]
        return (a + b) / s

    def over(s):
        _, dev, tr = parts(s)
        return (k * np.sum(dev * dev, -1) > pf.EXP_LIMIT) | (kh * tr * tr > pf.EXP_LIMIT)

    return ClosedFormModel(
        fn, dfn, name="exp-hencky", overflow_fn=over,
        params={"mu": mu, "kappa": kappa, "k": k, "k_hat": kh},
    )


def dev_log_squared_model() -> ClosedFormModel:
    """F -> ||dev log U||^2."""

    def fn(s):
        dev = np.log(s) - np.log(s).mean(axis=-1, keepdims=True)
        return np.sum(dev * dev, -1)

    def dfn(s):
        dev = np.log(s) - np.log(s).mean(axis=-1, keepdims=True)
        return 2.0 * dev / s

    return ClosedFormModel(fn, dfn, name="dev-log-squared")


def log_squared_model() -> SpectralSumModel:
    """F -> ||log U||^2 = sum ln^2(sigma_i)."""
    return SpectralSumModel(pf.log_squared(), name="log-squared")


def dist2_model() -> SpectralSumModel:
    """F -> ||U - I||^2 = sum (sigma_i - 1)^2."""
    return SpectralSumModel(pf.quadratic(), name="dist2")


def frobenius_squared_model() -> ClosedFormModel:
    """F -> ||F||^2, convex in F."""
    return ClosedFormModel(
        lambda s: np.sum(s * s, -1), lambda s: 2.0 * s, name="frobenius-squared"
    )


# ---------------------------------------------------------------------------
# Polyconvex extensions


def euclid_extension_model(alpha: float = 1.0) -> SpectralSumModel:
    """sum phi_alpha(sigma_i) - ln(det F) / (2 alpha)."""
    prof = pf.phi_alpha(alpha)
    return SpectralSumModel(
        prof,
        log_coeff=1.0 / (2.0 * alpha),
        name="euclid-ext",
        agreement=(1.0 / (2.0 * alpha), math.inf),
        params={"alpha": alpha},
    )


def geodesic_extension_model(gamma: float = 1.0 / 3.0) -> SpectralSumModel:
    """sum phi_gamma(sigma_i) - (2 - 2 gamma) ln(det F)."""
    prof = pf.phi_gamma(gamma)
    return SpectralSumModel(
        prof,
        log_coeff=2.0 - 2.0 * gamma,
        name="geodesic-ext",
        agreement=(math.exp(gamma - 1.0), math.exp(gamma)),
        params={"gamma": gamma},
    )


def hencky_extension_model(p: LameParameters) -> SpectralSumModel:
    """mu * (geodesic extension with gamma = 1/3) + psi_Lambda(det F)."""
    if p.lam < 0:
        raise ParameterError(f"the extension needs Lambda >= 0, got {p.lam}")
    g = 1.0 / 3.0
    return SpectralSumModel(
        pf.phi_gamma(g),
        weight=p.mu,
        log_coeff=p.mu * (2.0 - 2.0 * g),
        volumetric=pf.psi_vol(p.lam),
        name="hencky-ext",
        agreement=(math.exp(g - 1.0), math.exp(g)),
        params={"mu": p.mu, "lambda": p.lam},
    )


def euclid_extension_energy(F, alpha: float = 1.0):
    return euclid_extension_model(alpha).value(F)


def geodesic_extension_energy(F, gamma: float):
    return geodesic_extension_model(gamma).value(F)


def hencky_extension_energy(F, p: LameParameters):
    return hencky_extension_model(p).value(F)


EPS_GRID_START = 0.499
EPS_GRID_RATIO = 0.95
EPS_GRID_MIN = 1e-6


def _eps_admissible(w: pf.ScalarProfile, eps: float, w2: float, samples: int) -> bool:
    lam = np.linspace(1.0 - eps, 1.0 + eps, samples)
    margin = 1e-12
    return bool(
        np.all(w.d2(lam) > 0.5 * w2 + margin) and np.all(w.d1(lam) > -w2 / 12.0 + margin)
    )


def select_epsilon(w: pf.ScalarProfile, samples: int = 1000) -> float:
    """Largest eps on a descending geometric grid from 0.499 satisfying
    w'' > w''(1)/2 and w' > -w''(1)/12 on [1 - eps, 1 + eps]."""
    w2 = float(w.d2(np.array([1.0]))[0])
    eps = EPS_GRID_START
    while eps >= EPS_GRID_MIN:
        if _eps_admissible(w, eps, w2, samples):
            return eps
        eps *= EPS_GRID_RATIO
    raise ConstructionError(
        f"no admissible epsilon >= {EPS_GRID_MIN} for {w.name} (w''(1) = {w2:.6g})"
    )


def valanis_landel_extension(
    w: pf.ScalarProfile, epsilon: Optional[float] = None, tol: float = 1e-10
) -> SpectralSumModel:
    """Polyconvex extension of F -> sum w(sigma_i) from a neighbourhood of the identity."""
    one = np.array([1.0])
    w1, w2 = float(w.d1(one)[0]), float(w.d2(one)[0])
    if abs(w1) > tol:
        raise ConstructionError(f"need w'(1) = 0, got {w1:.3e}")
    if not w2 > 0:
        raise ConstructionError(f"need w''(1) > 0, got {w2:.6g}")
    if epsilon is None:
        epsilon = select_epsilon(w)
    elif not 0.0 < epsilon < 0.5:
        raise ConstructionError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    elif not _eps_admissible(w, epsilon, w2, 1000):
        raise ConstructionError(f"epsilon = {epsilon} violates the selection inequalities")
    prof, c = pf.valanis_landel_profile(w, epsilon)
    return SpectralSumModel(
        prof,
        log_coeff=c,
        name=f"vl-ext({w.name})",
        agreement=(1.0 - epsilon, 1.0 + epsilon),
        params={"epsilon": epsilon},
    )


def generalized_valanis_landel_extension(
    w: pf.ScalarProfile,
    wvol: pf.ScalarProfile,
    vol_interval: tuple[float, float],
    epsilon: Optional[float] = None,
) -> SpectralSumModel:
    """Extension of sum w(sigma_i) + Wvol(det F), with Wvol convex on ``vol_interval``."""
    base = valanis_landel_extension(w, epsilon)
    vol = pf.convex_extend_scalar(wvol, *vol_interval)
    lo, hi = base.agreement
    return SpectralSumModel(
        base.profile,
        log_coeff=base.log_coeff,
        volumetric=vol,
        name=f"gvl-ext({w.name}, {wvol.name})",
        agreement=(lo, hi),
        params=dict(base.params, vol_interval=list(vol_interval)),
    )
