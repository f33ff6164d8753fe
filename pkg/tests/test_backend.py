import os
import subprocess
import sys

import numpy as np
import pytest

from otima import _kernels_numpy as kn
from otima import grating as G

nb = pytest.importorskip("otima._kernels_numba")


def test_j_table_parity():
    x = np.linspace(0.01, 60.0, 97)
    a = kn.j_table(x, 40, 120)
    b = nb.j_table(x, 40, 120)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-15)


def test_i_table_parity():
    rng = np.random.default_rng(0)
    z = rng.uniform(0.01, 80.0, 64) + 1j * rng.uniform(-40.0, 40.0, 64)
    a = kn.i_scaled_table(z, 30, 150)
    b = nb.i_scaled_table(z, 30, 150)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-16)


def test_tl_sum_parity():
    b, J = G.fourier_table(G.GratingPulse(8.0, 8.0))
    ns = np.arange(-12, 13)
    xis = np.linspace(-2.0, 2.0, ns.size)
    assert np.allclose(kn.tl_sum(b, J, ns, xis), nb.tl_sum(b, J, ns, xis), rtol=1e-13, atol=1e-16)


def test_trajectories_parity():
    rng = np.random.default_rng(1)
    n = 10_000
    d, mass = 78.8e-9, 1.66e-21
    args = (rng.uniform(0, d, n), rng.normal(0, mass, n), rng.uniform(size=n), rng.uniform(size=n))
    rest = (8.0, 8.0, 8.0, 8.0, d, mass, 0.015, 0.015, 9.81, 1.0545718e-34)
    a_alive, a_x = kn.trajectories(*args, *rest)
    b_alive, b_x = nb.trajectories(*args, *rest)
    assert np.array_equal(a_alive, b_alive)
    # unfolded positions are ~1 cm, so compare modulo d at a few ulps of that
    gap = np.abs(a_x - b_x)
    assert np.all(np.minimum(gap, d - gap) < 1e-9 * d)


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("yes", "numpy"), ("0", "numba"), ("", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, OTIMA_DISABLE_NUMBA=flag)
    code = "import otima; print(otima.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def test_numpy_backend_end_to_end():
    env = dict(os.environ, OTIMA_DISABLE_NUMBA="1")
    code = (
        "from otima import interferometer as I, grating as G; from otima.constants import AMU;"
        "m=1e6*AMU; tt=I.talbot_time(m, I.F2_PERIOD);"
        "print(float(I.visibility_sin(I.PulseSequence(T=tt), I.EnsembleModel(m, 1.0), [G.GratingPulse.from_beta(8.0, 1.0)]*3)))"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == pytest.approx(0.8474385717745567, abs=1e-12)
