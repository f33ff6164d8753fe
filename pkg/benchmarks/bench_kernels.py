"""Time the numba kernels against the pure-numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is called once
to trigger compilation, then timed over several repeats; the best time is
reported.
"""
import timeit

import numpy as np

from otima import _kernels_numba as nb
from otima import _kernels_numpy as kn
from otima import grating


def cases():
    rng = np.random.default_rng(0)
    x = np.linspace(0.1, 80.0, 2000)
    z = rng.uniform(0.1, 80.0, 2000) + 1j * rng.uniform(-40, 40, 2000)
    b, J = grating.fourier_table(grating.GratingPulse(8.0, 8.0))
    ns = np.tile(np.arange(-20, 21), 100)
    xis = np.linspace(-3, 3, ns.size)
    n = 1 << 20
    d, mass = 78.8e-9, 1.66e-21
    traj = (
        rng.uniform(0, d, n), rng.normal(0, mass, n), rng.uniform(size=n), rng.uniform(size=n),
        8.0, 8.0, 8.0, 8.0, d, mass, 0.015, 0.015, 9.81, 1.0545718e-34,
    )
    return {
        "j_table": (x, 60, 200),
        "i_scaled_table": (z, 60, 200),
        "tl_sum": (b, J, ns, xis),
        "trajectories": traj,
    }


def main(repeat=5):
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, args in cases().items():
        times = []
        for mod in (kn, nb):
            fn = getattr(mod, name)
            fn(*args)
            times.append(min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat)) * 1e3)
        print(f"{name:<16}{times[0]:>12.2f}{times[1]:>12.2f}{times[0] / times[1]:>10.1f}")


if __name__ == "__main__":
    main()
