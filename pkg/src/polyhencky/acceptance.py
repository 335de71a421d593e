"""Exit criteria of the library, each runnable on its own.

Every check returns a Criterion carrying the verdict, a one-line detail and
its wall time; a criterion passes only if its property holds and it ran
within its time budget.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import energies as en
from . import fem
from . import lab
from . import profiles as pf
from .hulls import HULL_RADIUS, conformal_part, dist2_SO2, rank_one_hull_dist2_SO2
from .figures import figure_csv, read_csv
from .sampling import chunk_rng, random_gl_plus
from .tensor import frobenius_norm, singular_values

ELLIPTIC_LOWER = 0.21


@dataclass
class Criterion:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.ok and self.seconds <= self.budget

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"[{tag}] {self.number:2d}. {self.title}: {self.detail} "
            f"({self.seconds:.2f}s / budget {self.budget:g}s)"
        )


def _timed(number: int, title: str, budget: float, fn: Callable[[], tuple[bool, str]]) -> Criterion:
    t0 = time.perf_counter()
    ok, detail = fn()
    return Criterion(number, title, bool(ok), detail, time.perf_counter() - t0, budget)


def _rel(a: float, b: float) -> float:
    m = max(abs(a), abs(b))
    return 0.0 if m == 0 else abs(a - b) / m


def _branch_gap(profile: pf.ScalarProfile, which: str = "value") -> float:
    gaps = []
    for i, b in enumerate(profile.breakpoints):
        x = np.array([b])
        left = float(getattr(profile.pieces[i], which)(x)[0])
        right = float(getattr(profile.pieces[i + 1], which)(x)[0])
        gaps.append(_rel(left, right))
    return max(gaps, default=0.0)


def criterion_1_continuity() -> Criterion:
    def run():
        gaps = [_branch_gap(pf.phi_gamma(g)) for g in (0.0, 0.25, 0.5, 1.0)]
        gaps += [_branch_gap(pf.phi_alpha(a)) for a in (0.55, 0.75, 1.0)]
        gaps += [_branch_gap(pf.psi_vol(L)) for L in (0.0, 1.0, 2.0)]
        dgap = max(_branch_gap(pf.psi_vol(L), "d1") for L in (0.0, 1.0, 2.0))
        worst = max(gaps)
        return worst <= 1e-12 and dgap <= 1e-12, f"max value gap {worst:.2e}, psi' gap {dgap:.2e}"

    return _timed(1, "profile continuity", 1.0, run)


def criterion_2_agreement(samples: int = 10_000) -> Criterion:
    def run():
        worst, fails = 0.0, []
        cfg = lab.ScanConfig(samples=samples, seed=2)
        checks = []
        for g in (1.0 / 3.0, 0.5):
            checks.append((f"gamma={g:.3g}", en.log_squared_model(), en.geodesic_extension_model(g), None))
        for mu, L in ((1.0, 0.0), (1.0, 2.0), (2.0, 1.0)):
            p = en.LameParameters(mu, L)
            checks.append((f"hencky mu={mu:g} L={L:g}", en.hencky_model(p), en.hencky_extension_model(p), None))
        checks.append(("alpha=1", en.dist2_model(), en.euclid_extension_model(1.0), (0.5, cfg.hi)))
        for label, orig, ext, region in checks:
            rep = lab.extension_agreement_check(orig, ext, region, cfg, tol=1e-10)
            worst = max(worst, rep.extra["max_discrepancy"])
            if not rep.passed or rep.tested != samples:
                fails.append(label)
        return not fails, f"max relative discrepancy {worst:.2e}" + (f"; failed {fails}" if fails else "")

    return _timed(2, "extension agreement", 10.0, run)


def polyconvex_models() -> dict:
    return {
        "hencky-ext L=0": en.hencky_extension_model(en.LameParameters(1.0, 0.0)),
        "hencky-ext L=2": en.hencky_extension_model(en.LameParameters(1.0, 2.0)),
        "euclid-ext a=1": en.euclid_extension_model(1.0),
        "geodesic-ext g=1/2": en.geodesic_extension_model(0.5),
        "vl-ext ln^2": en.valanis_landel_extension(pf.log_squared()),
    }


def criterion_3_polyconvexity(samples: int = 100_000) -> Criterion:
    def run():
        cfg = lab.ScanConfig(samples=samples, lo=0.05, hi=20.0, threshold=1e-8, n=3, seed=3)
        parts, ok = [], True
        for label, model in polyconvex_models().items():
            rep = lab.rank_one_convexity_scan(model, cfg)
            ok &= rep.passed
            parts.append(f"{label}: {len(rep.violations)} viol/{rep.tested} (+{rep.skipped} overflow)")
        return ok, "; ".join(parts)

    return _timed(3, "polyconvexity evidence (rank-one scans)", 120.0, run)


def in_elliptic_box(F) -> bool:
    s = singular_values(np.asarray(F))
    return bool(np.all((s >= ELLIPTIC_LOWER) & (s <= math.exp(1.0 / 3.0))))


def criterion_4_negative_controls() -> Criterion:
    def run():
        W_H = en.hencky_model(en.LameParameters(1.0, 0.0))
        rep = lab.rank_one_convexity_scan(W_H, lab.ScanConfig(seed=4), directed=True)
        lh_ok = (
            bool(rep.violations)
            and all(lab.verify_lh_witness(W_H, w) for w in rep.violations)
            and not any(in_elliptic_box(w.F) for w in rep.violations)
        )
        raw = en.log_squared_model()
        seg = lab.segment_convexity_scan(raw, lab.ScanConfig(samples=4096, seed=4))
        seg_ok = bool(seg.violations) and all(lab.verify_segment_witness(raw, w) for w in seg.violations)
        return lh_ok and seg_ok, (
            f"W_H LH witness margin {rep.worst_margin:.3g} (verified={lh_ok}); "
            f"sum ln^2 segment violations {len(seg.violations)} (verified={seg_ok})"
        )

    return _timed(4, "negative controls", 60.0, run)


def criterion_5_elliptic_interval() -> Criterion:
    def run():
        W_H = en.hencky_model(en.LameParameters(1.0, 0.0))
        emap = lab.ellipticity_probe(
            W_H, (ELLIPTIC_LOWER, math.exp(1.0 / 3.0), 20), lab.ScanConfig(directions=64, seed=5)
        )
        return emap.violations_found == 0, (
            f"{emap.violation.size} cells x 64 directions, violations found {emap.violations_found}, "
            f"worst margin {emap.margin.min():.3g}"
        )

    return _timed(5, "ellipticity on the known interval", 120.0, run)


def criterion_6_coercivity() -> Criterion:
    def run():
        model = en.hencky_extension_model(en.LameParameters(1.0, 0.0))
        rep = lab.coercivity_check(model, lab.ScanConfig(samples=1000, lo=0.05, hi=700.0, seed=6))
        dom = rep.extra["dominance_samples"]
        return rep.passed and rep.tested == 1000 and dom > 0, (
            f"bound held at {rep.tested} samples, ||F||^4 dominance at {dom} samples with ||F|| >= 50, "
            f"worst margin {rep.worst_margin:.3g}"
        )

    return _timed(6, "coercivity", 5.0, run)


def spectral_sum_models() -> dict:
    return {
        "hencky-ext L=0": en.hencky_extension_model(en.LameParameters(1.0, 0.0)),
        "hencky-ext mu=2 L=1": en.hencky_extension_model(en.LameParameters(2.0, 1.0)),
        "euclid-ext a=1": en.euclid_extension_model(1.0),
        "euclid-ext a=0.75": en.euclid_extension_model(0.75),
        "geodesic-ext g=1/3": en.geodesic_extension_model(1.0 / 3.0),
        "geodesic-ext g=1/2": en.geodesic_extension_model(0.5),
        "vl-ext ln^2": en.valanis_landel_extension(pf.log_squared()),
        "vl-ext (l-1)^2": en.valanis_landel_extension(pf.quadratic()),
        "log-squared": en.log_squared_model(),
        "dist2": en.dist2_model(),
    }


def fd_gradient(model: en.EnergyModel, F: np.ndarray) -> np.ndarray:
    """Central differences, step 1e-6 max(1, ||F||) per entry."""
    n = F.shape[-1]
    h = 1e-6 * np.maximum(1.0, frobenius_norm(F))[:, None, None]
    G = np.empty_like(F)
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            G[:, i, j] = (model.value(F + h * E) - model.value(F - h * E)) / (2.0 * h[:, 0, 0])
    return G


def gradient_errors(model, F) -> np.ndarray:
    G = model.gradient(F)
    err = frobenius_norm(fd_gradient(model, F) - G) / frobenius_norm(G)
    return np.where(np.isfinite(err), err, np.inf)


def criterion_7_gradient(samples: int = 1000) -> Criterion:
    def run():
        rng = chunk_rng(7, 0)
        worst, fails = 0.0, []
        for n in (2, 3):
            F, _ = random_gl_plus(rng, samples, n, 0.1, 10.0)
            for label, model in spectral_sum_models().items():
                err = float(gradient_errors(model, F).max())
                worst = max(worst, err)
                if err > 1e-5:
                    fails.append(f"{label} n={n}")
        return not fails, f"max relative FD error {worst:.2e}" + (f"; failed {fails}" if fails else "")

    return _timed(7, "gradient correctness", 10.0, run)


def criterion_8_minimizer() -> Criterion:
    def run():
        model = en.hencky_extension_model(en.LameParameters(1.0, 0.0))
        cases = [(2, k, np.diag([1.2, 0.9])) for k in (2, 4, 8)] + [(3, 2, np.diag([1.1, 1.0, 0.9]))]
        worst, ok = 0.0, True
        for n, k, F0 in cases:
            mesh = fem.build_mesh(n, k)
            target = float(mesh.volumes.sum()) * float(model.value(F0))
            for seed in range(3):
                x0 = fem.perturbed_initial_field(mesh, F0, seed)
                res = fem.minimize(mesh, model, F0, initial=x0)
                err = abs(res.energy - target) / target
                worst = max(worst, err)
                ok &= res.converged and err <= 1e-6
        return ok, f"max relative deviation from homogeneous optimum {worst:.2e} over {len(cases) * 3} runs"

    return _timed(8, "minimizer (affine boundary data)", 120.0, run)


def criterion_9_hulls(samples: int = 100_000) -> Criterion:
    def run():
        rng = chunk_rng(9, 0)
        F, s = random_gl_plus(rng, samples, 2, 0.01, 5.0)
        d2 = dist2_SO2(F)
        hull = rank_one_hull_dist2_SO2(F)
        dominated = bool(np.all(hull - d2 <= 1e-12 * np.maximum(1.0, d2)))
        predicate = frobenius_norm(conformal_part(F)) >= HULL_RADIUS
        equal = np.abs(hull - d2) <= 1e-12 * np.maximum(1.0, d2)
        # off the predicate the gap is (s1 + s2 - 1)^2; skip samples where that is below roundoff
        decided = (s.sum(axis=1) - 1.0) ** 2 > 1e-10
        region_ok = bool(np.all(equal[decided] == predicate[decided]))
        well = lab.scalar_convexity_check(pf.double_well_hull(), (-2.0, 2.0),
                                          lab.ScanConfig(samples=1000, threshold=1e-10))
        x = np.linspace(-3.0, 3.0, 6001)
        out = np.abs(x) >= 1.0
        outside_ok = bool(np.all(pf.double_well_hull().value(x[out]) == pf.double_well().value(x[out])))
        ok = dominated and region_ok and well.passed and outside_ok
        return ok, (
            f"hull<=dist2 {dominated}, equality region matches predicate {region_ok} "
            f"({int(decided.sum())} decided samples), double-well hull convex {well.passed}, "
            f"equals well outside (-1,1) {outside_ok}"
        )

    return _timed(9, "rank-one hulls", 10.0, run)


def figure_landmarks() -> dict:
    results = {}
    header, data = read_csv(figure_csv("phi"))
    x = data[:, 0]
    tails = []
    for col, g in zip(range(1, 5), (0.0, 0.25, 0.5, 1.0)):
        mask = x <= math.exp(g - 1.0)
        tails.append(mask.any() and np.all(np.abs(data[mask, col] + (g - 1.0) ** 2) <= 1e-15))
    results["phi constant tails"] = all(tails)

    header, data = read_csv(figure_csv("radial"))
    x = data[:, 0]
    step = x[1] - x[0]
    at_one = [abs(np.interp(1.0, x, data[:, c])) for c in range(1, 4)]
    results["f_gamma(1) = 0"] = max(at_one) <= step**2 and bool(np.all(data[:, 1:] >= 0))

    header, data = read_csv(figure_csv("psi"))
    t, psi = data[:, 0], data[:, 1]
    step = t[1] - t[0]
    results["psi(1) = 0"] = abs(np.interp(1.0, t, psi)) <= step**2
    i = int(np.searchsorted(t, math.e))
    slopes = np.diff(psi) / step
    results["psi kink-free at e"] = abs(slopes[i] - slopes[i - 1]) <= 10.0 * step

    header, data = read_csv(figure_csv("hull"))
    x, well, hull = data.T
    inside = np.abs(x) < 1.0
    results["hull landmarks"] = bool(
        np.all(hull[inside] == 0.0) and np.all(hull[~inside] == well[~inside]) and well[np.argmin(np.abs(x))] > 0.99
    )
    return results


def criterion_10_figures() -> Criterion:
    def run():
        res = figure_landmarks()
        bad = [k for k, v in res.items() if not v]
        return not bad, "all landmarks present" if not bad else f"missing: {bad}"

    return _timed(10, "figure data landmarks", 1.0, run)


CRITERIA = (
    criterion_1_continuity,
    criterion_2_agreement,
    criterion_3_polyconvexity,
    criterion_4_negative_controls,
    criterion_5_elliptic_interval,
    criterion_6_coercivity,
    criterion_7_gradient,
    criterion_8_minimizer,
    criterion_9_hulls,
    criterion_10_figures,
)


def run_all(echo: Callable[[str], None] = print) -> list[Criterion]:
    out = []
    for fn in CRITERIA:
        c = fn()
        echo(c.line())
        out.append(c)
    return out
