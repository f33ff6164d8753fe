
import numpy as np
import pytest

from otima import grating as G
from otima import interferometer as I
from otima import oracle, specfun
from otima.constants import AMU
from otima.errors import PrecisionError

D = I.F2_PERIOD
MASS = 1e6 * AMU
TT = I.talbot_time(MASS, D)
ENS = I.EnsembleModel(MASS, 1.0, 1e-3)
GOLD = G.GratingPulse.from_beta(8.0, 1.0)


def seq(frac=1.0, **kw):
    return I.PulseSequence(T=frac * TT, d=D, **kw)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(count=32)
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(tolerance=0.0)
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(scheme="simpson")
    with pytest.raises(ValueError):
        oracle.b_by_quadrature(0, GOLD, oracle.QuadratureSpec(scheme="gauss-legendre"))


def test_refinement_failure_raises():
    # harmonic content beyond the largest allowed grid
    with pytest.raises(PrecisionError):
        oracle.b_by_quadrature(1, G.GratingPulse(1.0, 2e5))


def test_quadrature_matches_closed_forms():
    for n in range(-4, 5):
        assert oracle.b_by_quadrature(n, GOLD) == pytest.approx(complex(G.fourier_b(n, GOLD)), abs=1e-12)
        assert oracle.B_by_kernel_quadrature(n, 0.73, GOLD) == pytest.approx(complex(G.tl_quantum(n, 0.73, GOLD)), abs=1e-12)


def test_dipole_average():
    assert oracle.dipole_average_by_quadrature(0.0)[0] == pytest.approx(1.0, abs=1e-14)
    k = np.array([0.3, 1.0, 2.5])
    a = oracle.dipole_average_by_quadrature(k)
    b = oracle.dipole_average_by_quadrature(k, 32, 32)
    assert np.allclose(a, b, atol=1e-12)
    assert np.all(np.diff(a) < 0)


def test_sphere_quadrature_validation():
    with pytest.raises(ValueError):
        oracle.R_by_sphere_quadrature(0, 0.5, -1.0)
    assert oracle.R_by_sphere_quadrature(3, 0.5, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert oracle.R_by_sphere_quadrature(0, 0.5, 0.0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("mode", ["neutral", "inverse"])
def test_mask_fft(mode):
    c = oracle.mask_fourier_fft(8.0, mode)
    ref = G.tl_mask if mode == "neutral" else G.inverse_mask
    for n in range(-6, 7):
        assert c(n) == pytest.approx(float(ref(n, 8.0)), abs=1e-14)


@pytest.mark.parametrize("order, x", [(0, 0.5), (1, 7.0), (7, 3.0), (-3, 9.5), (12, 40.0)])
def test_series_oracles(order, x):
    assert oracle.bessel_j_series(order, x) == pytest.approx(specfun.bessel_j(order, x), rel=1e-12, abs=1e-300)
    z = x * (0.6 - 0.8j)
    assert oracle.bessel_i_series(order, z) == pytest.approx(complex(specfun.bessel_i(order, z)), rel=1e-12)


def test_mc_argument_checks():
    with pytest.raises(ValueError):
        oracle.classical_mc(seq(), ENS, [GOLD] * 3, samples=1000)
    custom = I.EnsembleModel(MASS, 1.0, coherence=lambda s: np.exp(-np.abs(s)))
    with pytest.raises(ValueError):
        oracle.classical_mc(seq(), custom, [GOLD] * 3, samples=10**5)


def test_mc_is_deterministic():
    a = oracle.classical_mc(seq(0.4), ENS, [GOLD] * 3, samples=2 * 10**5, seed=7)
    b = oracle.classical_mc(seq(0.4), ENS, [GOLD] * 3, samples=2 * 10**5, seed=7, workers=3)
    c = oracle.classical_mc(seq(0.4), ENS, [GOLD] * 3, samples=2 * 10**5, seed=8)
    assert np.array_equal(a.S_ell, b.S_ell)
    assert a.seed == 7 and a.samples == 2 * 10**5
    assert not np.array_equal(a.S_ell, c.S_ell)


def test_mc_error_scales_with_samples():
    a = oracle.classical_mc(seq(0.4), ENS, [GOLD] * 3, samples=10**5, seed=1)
    b = oracle.classical_mc(seq(0.4), ENS, [GOLD] * 3, samples=16 * 10**5, seed=1)
    ratio = a.stderr[a.ell == 1][0] / b.stderr[b.ell == 1][0]
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_mc_all_off_is_uniform():
    off = G.GratingPulse()
    r = oracle.classical_mc(seq(), ENS, [off] * 3, samples=10**5, seed=0)
    assert r.S0 == pytest.approx(1.0, abs=1e-12)
    assert abs(r.component(1)) < 5 * r.stderr[r.ell == 1][0] + 1e-12


@pytest.mark.parametrize("frac", [0.25, 0.6, 1.3])
def test_mc_agrees_with_classical_model(frac):
    s = seq(frac, acceleration=2.0)
    model = I.fringe(s, ENS, [GOLD] * 3, model="classical")
    mc = oracle.classical_mc(s, ENS, [GOLD] * 3, samples=10**6, seed=3)
    for l in (0, 1, 2):
        err = mc.stderr[mc.ell == l][0]
        assert abs(model.component(l) - mc.component(l)) < 5 * err


def test_mc_inconclusive_flag():
    r = oracle.classical_mc(seq(0.6), ENS, [GOLD] * 3, samples=10**5, seed=0, target=1e-6)
    assert r.inconclusive
    r = oracle.classical_mc(seq(0.6), ENS, [GOLD] * 3, samples=10**5, seed=0, target=10.0)
    assert not r.inconclusive


def test_verification_suite_passes():
    checks = oracle.verification_suite("fast")
    assert len(checks) > 20
    assert all(c.passed for c in checks), [c.name for c in checks if not c.passed]
    with pytest.raises(ValueError):
        oracle.verification_suite("medium")


def test_verification_suite_detects_tampering(monkeypatch):
    real = specfun.bessel_j

    def broken(order, x):
        return real(order, x) * (1 + 1e-6)

    monkeypatch.setattr(specfun, "bessel_j", broken)
    checks = oracle.verification_suite("fast")
    assert any(not c.passed for c in checks if c.name.startswith("bessel_j"))
