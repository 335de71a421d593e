import math

import numpy as np
import pytest
from scipy.linalg import logm
from scipy.optimize import brentq

from polyhencky import energies as en
from polyhencky import profiles as pf
from polyhencky.errors import ConstructionError, DomainError, ParameterError
from polyhencky.lab import ScanConfig, extension_agreement_check
from polyhencky.sampling import chunk_rng, compose, haar_rotations

from .conftest import sample_F

E = math.e
P10 = en.LameParameters(1.0, 0.0)


def extension_models():
    return [
        en.hencky_extension_model(P10),
        en.hencky_extension_model(en.LameParameters(2.0, 1.0)),
        en.euclid_extension_model(1.0),
        en.euclid_extension_model(0.6),
        en.geodesic_extension_model(0.5),
        en.valanis_landel_extension(pf.log_squared()),
        en.valanis_landel_extension(pf.quadratic()),
    ]


def all_models():
    return extension_models() + [
        en.hencky_model(en.LameParameters(1.0, 2.0)),
        en.exp_hencky_model(en.ExpHenckyParameters(1.0, 1.0, 1.0, 1.0)),
        en.log_squared_model(),
        en.dev_log_squared_model(),
        en.dist2_model(),
        en.frobenius_squared_model(),
    ]


def test_hencky_examples():
    for p in (P10, en.LameParameters(2.0, 3.0)):
        assert en.hencky_energy(np.eye(3), p) == 0.0
    assert en.hencky_energy(E * np.eye(3), P10) == pytest.approx(3.0, rel=1e-14)
    assert en.hencky_model(P10).value(E * np.eye(3)) == pytest.approx(3.0, rel=1e-14)


def test_log_strain_measure_examples():
    np.testing.assert_allclose(en.log_strain_measures(np.eye(3)), (0, 0, 0), atol=1e-30)
    np.testing.assert_allclose(en.log_strain_measures(E * np.eye(2)), (0, 2, 4), atol=1e-14)
    np.testing.assert_allclose(en.log_strain_measures(np.diag([E, 1 / E])), (2, 2, 0), atol=1e-14)


def test_log_strain_measures_against_scipy_logm():
    F, _ = sample_F(50, 3, seed=11)
    for f in F:
        L = logm(_sqrtm_spd(f.T @ f)).real
        dev = L - np.trace(L) / 3 * np.eye(3)
        ref = (np.sum(dev * dev), np.sum(L * L), np.trace(L) ** 2)
        np.testing.assert_allclose(en.log_strain_measures(f), ref, rtol=1e-10, atol=1e-13)


def _sqrtm_spd(C):
    w, V = np.linalg.eigh(C)
    return (V * np.sqrt(w)) @ V.T


def test_exp_hencky_examples():
    p = en.ExpHenckyParameters(mu=1.3, kappa=0.7, k=2.0, k_hat=3.0)
    assert en.exp_hencky_energy(np.eye(3), p) == pytest.approx(1.3 / 2.0 + 0.7 / 6.0)
    q = en.ExpHenckyParameters(1.0, 1.0, 1.0, 1.0)
    expected = 1.0 + math.exp(9.0) / 2.0  # 4052.541963787692...
    assert en.exp_hencky_energy(E * np.eye(3), q) == pytest.approx(expected, rel=1e-13)
    assert en.exp_hencky_model(q).value(E * np.eye(3)) == pytest.approx(4052.5419637876920, rel=1e-13)


def test_two_forms_of_hencky_energy_agree():
    F, _ = sample_F(10_000, 3, 0.05, 20.0, seed=21)
    for mu, lam in ((1.0, 0.0), (1.0, 2.0), (2.0, 1.0)):
        p = en.LameParameters(mu, lam)
        dev2, full2, tr2 = en.log_strain_measures(F)
        a = mu * dev2 + 0.5 * p.kappa(3) * tr2
        b = mu * full2 + 0.5 * lam * tr2
        np.testing.assert_allclose(a, b, rtol=1e-11)
        np.testing.assert_allclose(en.hencky_model(p).value(F), a, rtol=1e-11)


def test_lame_conversions():
    p = en.LameParameters.from_kappa(1.0, 2.0, 3)
    assert p.lam == pytest.approx(2.0 - 2.0 / 3.0)
    assert p.kappa(3) == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        en.LameParameters(0.0, 1.0)


def test_euclid_extension_examples():
    assert en.euclid_extension_energy(np.eye(3), 1.0) == pytest.approx(0.0, abs=1e-15)
    # singular values (2, 0.3): (1 + ln2/2) + (1/4 + ln(1/2)/2) - ln(0.6)/2
    assert en.euclid_extension_energy(np.diag([2.0, 0.3]), 1.0) == pytest.approx(1.50541281188299534, rel=1e-14)


def test_geodesic_and_hencky_extension_examples():
    for g in (0.1, 1 / 3, 0.5, 0.9):
        assert en.geodesic_extension_energy(np.eye(3), g) == pytest.approx(0.0, abs=1e-15)
    assert en.hencky_extension_energy(np.eye(3), P10) == 0.0
    F = np.diag([1.1, 1.0, 0.9])
    assert en.hencky_extension_energy(F, P10) == pytest.approx(0.0201848686340157956, rel=1e-13)


def test_hencky_extension_rejects_negative_lambda():
    with pytest.raises(ParameterError):
        en.hencky_extension_model(en.LameParameters(1.0, -0.5))


@pytest.mark.parametrize("model", all_models(), ids=lambda m: m.name)
def test_frame_indifference(model):
    rng = chunk_rng(31, 0)
    F, _ = sample_F(500, 3, 0.1, 5.0, seed=31)
    Q, R = haar_rotations(rng, 500, 3), haar_rotations(rng, 500, 3)
    W = model.value(F)
    np.testing.assert_array_less(np.abs(model.value(Q @ F @ R) - W), 1e-11 * (1 + np.abs(W)))


@pytest.mark.parametrize("model", extension_models()[:2] + extension_models()[5:], ids=lambda m: m.name)
def test_stress_free_reference(model):
    for n in (2, 3):
        np.testing.assert_allclose(en.isotropic_gradient(model, np.eye(n)), 0.0, atol=1e-10)


@pytest.mark.parametrize("model", all_models(), ids=lambda m: m.name)
def test_gradient_against_finite_differences(model):
    from polyhencky.acceptance import gradient_errors

    for n in (2, 3):
        F, _ = sample_F(200, n, 0.2, 4.0, seed=41 + n)
        assert gradient_errors(model, F).max() < 1e-5


def test_gradient_kink_flag():
    model = en.valanis_landel_extension(pf.log_squared())
    kink = model.profile.breakpoints[0]
    G, flag = en.isotropic_gradient(model, np.diag([kink, 1.0, 1.0]), with_kink=True)
    assert flag
    _, flag = en.isotropic_gradient(model, np.diag([1.01, 1.0, 1.0]), with_kink=True)
    assert not flag


def test_singular_behaviour_towards_zero_determinant():
    W = [en.hencky_extension_energy(t * np.eye(3), P10) for t in (1e-1, 1e-2, 1e-3)]
    assert W[0] < W[1] < W[2]
    # every singular value on the constant branch: 3 (-4/9) - (4/3) ln(1e-9)
    assert W[2] == pytest.approx(-4.0 / 3.0 + 12.0 * math.log(10.0), rel=1e-13)


def test_overflow_flag_and_saturation():
    model = en.hencky_extension_model(en.LameParameters(1.0, 2.0))
    W, flag = model.evaluate(np.diag([800.0, 1.0, 1.0]))
    assert flag and np.isfinite(W)
    W, flag = model.evaluate(np.diag([5.0, 1.0, 1.0]))
    assert not flag


def test_domain_error_for_inverted_input():
    for model in all_models():
        with pytest.raises(DomainError):
            model.value(np.diag([1.0, -1.0, 1.0]))


def test_epsilon_selection_is_largest_grid_value_below_the_analytic_limit():
    # for ln^2 the binding inequality is w'(l) > -1/6 on the left end
    limit_log = 1.0 - brentq(lambda x: 2 * math.log(x) / x + 1 / 6, 0.5, 1.0)
    for w, limit in ((pf.log_squared(), limit_log), (pf.quadratic(), 1.0 / 12.0)):
        eps = en.select_epsilon(w)
        assert eps < limit < eps / en.EPS_GRID_RATIO
    assert en.select_epsilon(pf.log_squared()) == pytest.approx(0.071055474931841, rel=1e-12)


def test_valanis_landel_construction():
    vl = en.valanis_landel_extension(pf.quadratic())
    assert vl.value(np.eye(3)) == 0.0
    assert vl.log_coeff == pytest.approx(0.25)
    ln2 = en.valanis_landel_extension(pf.log_squared())
    rep = extension_agreement_check(en.log_squared_model(), ln2, None, ScanConfig(samples=5000))
    assert rep.passed and rep.tested == 5000


def test_valanis_landel_rejects_bad_input():
    concave = pf.ScalarProfile(
        "concave", (), (pf.Piece(lambda x: -0.5 * (x - 1) ** 2, lambda x: -(x - 1), lambda x: 0 * x - 1.0),)
    )
    with pytest.raises(ConstructionError):
        en.valanis_landel_extension(concave)
    shifted = pf.ScalarProfile("shifted", (), (pf.Piece(lambda x: x * x, lambda x: 2 * x, lambda x: 0 * x + 2),))
    with pytest.raises(ConstructionError):
        en.valanis_landel_extension(shifted)
    with pytest.raises(ConstructionError):
        en.valanis_landel_extension(pf.log_squared(), epsilon=0.3)
    with pytest.raises(ConstructionError):
        en.valanis_landel_extension(pf.log_squared(), epsilon=0.6)


def test_generalized_valanis_landel_agrees_with_volumetric_original():
    wvol = pf.log_squared()
    model = en.generalized_valanis_landel_extension(pf.quadratic(), wvol, (0.5, E), epsilon=0.05)
    F, s = sample_F(2000, 3, 0.96, 1.04, seed=51)
    det = np.prod(s, axis=1)
    orig = np.sum((s - 1) ** 2, axis=1) + np.log(det) ** 2
    np.testing.assert_allclose(model.value(F), orig, rtol=1e-10)
