"""Brute-force validators for the closed-form coefficients.

Nothing here calls the Bessel code: Fourier coefficients come from periodic
trapezoid sums or FFTs of the transmission, the dipole average from a sphere
quadrature, and the classical fringes from explicit trajectories. The
``verification_suite`` compares these against the fast evaluators.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np

from . import grating, interferometer, specfun
from ._backend import kernels
from .constants import HBAR
from .errors import PrecisionError
from .grating import GratingPulse
from .interferometer import FringeResult

MAX_ABSCISSAE = 1 << 16


@dataclass(frozen=True)
class QuadratureSpec:
    """Starting abscissa count, scheme and absolute convergence tolerance.

    The count is doubled until two successive levels agree within
    ``tolerance``.
    """

    count: int = 128
    scheme: str = "trapezoid-periodic"
    tolerance: float = 1e-13

    def __post_init__(self):
        if self.count < 64:
            raise ValueError("abscissa count must be >= 64")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.scheme not in ("trapezoid-periodic", "gauss-legendre"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")


DEFAULT_QUADRATURE = QuadratureSpec()


def _refine(evaluate, spec, what):
    count = spec.count
    prev = evaluate(count)
    while count < MAX_ABSCISSAE:
        count *= 2
        cur = evaluate(count)
        if np.max(np.abs(cur - prev)) <= spec.tolerance:
            return cur
        prev = cur
    raise PrecisionError(f"{what}: quadrature not converged at {count} abscissae")


def _periodic_fourier(f, n, count):
    # (1/d) int_0^d f(x) exp(-2 pi i n x/d) dx on the unit period
    u = np.arange(count) / count
    return np.mean(f(u) * np.exp(-2j * np.pi * n * u))


def b_by_quadrature(n, pulse: GratingPulse, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """b_n = (1/d) int_0^d t(x) exp(-2 pi i n x / d) dx by the periodic trapezoid rule."""
    if spec.scheme != "trapezoid-periodic":
        raise ValueError("Fourier quadrature needs the periodic trapezoid rule")
    f = lambda u: grating.transmission(u, 1.0, pulse)
    return complex(_refine(lambda c: _periodic_fourier(f, n, c), spec, f"b_{n}"))


def B_by_kernel_quadrature(n, xi, pulse: GratingPulse, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """B_n(xi) = (1/d) int dx exp(-2 pi i n x/d) t(x - xi d/2) conj t(x + xi d/2)."""
    if spec.scheme != "trapezoid-periodic":
        raise ValueError("Fourier quadrature needs the periodic trapezoid rule")

    def f(u):
        return grating.transmission(u - 0.5 * xi, 1.0, pulse) * np.conj(grating.transmission(u + 0.5 * xi, 1.0, pulse))

    return complex(_refine(lambda c: _periodic_fourier(f, n, c), spec, f"B_{n}({xi})"))


def dipole_average_by_quadrature(kappa, polar=64, azimuth=64):
    """Average of exp(i kappa u_x) over the pattern 3 sin^2(theta)/8 pi.

    theta is measured from the polarisation axis (perpendicular to x);
    Gauss-Legendre in cos(theta) times a uniform azimuth grid.
    """
    mu, wmu = np.polynomial.legendre.leggauss(polar)
    phi = 2.0 * np.pi * np.arange(azimuth) / azimuth
    ux = np.sqrt(1.0 - mu * mu)[:, None] * np.cos(phi)[None, :]
    density = 3.0 * (1.0 - mu * mu) / (8.0 * np.pi)
    kappa = np.atleast_1d(np.asarray(kappa, dtype=np.float64))
    out = np.empty(kappa.size)
    for i, k in enumerate(kappa):
        integrand = np.cos(k * ux).sum(axis=1) * (2.0 * np.pi / azimuth)
        out[i] = np.dot(wmu, density * integrand)
    return out


def R_by_sphere_quadrature(n, xi, nR, polar=64, azimuth=64, points=512, tolerance=1e-11):
    """R_n(xi) as the Fourier coefficient of eta(x - xi d/2, x + xi d/2) over x.

    eta(x, x') = exp{nR [Phi(k (x' - x)) cos(kx) cos(kx') - (cos^2 kx + cos^2 kx')/2]}
    with k = pi/d and Phi from ``dipole_average_by_quadrature``. The sphere grid
    is checked against a half-resolution grid, the x grid against a doubled one.
    """
    if nR < 0:
        raise ValueError("nR must be >= 0")
    phi = dipole_average_by_quadrature(np.pi * xi, polar, azimuth)[0]
    coarse = dipole_average_by_quadrature(np.pi * xi, polar // 2, azimuth // 2)[0]
    if abs(phi - coarse) > tolerance:
        raise PrecisionError(f"sphere quadrature not converged: {abs(phi - coarse):.2e}")

    def coeff(count):
        u = np.arange(count) / count
        c = np.cos(np.pi * (u - 0.5 * xi))
        cp = np.cos(np.pi * (u + 0.5 * xi))
        eta = np.exp(nR * (phi * c * cp - 0.5 * (c * c + cp * cp)))
        return np.fft.fft(eta)[n % count].real / count

    a, b = coeff(points), coeff(2 * points)
    if abs(a - b) > tolerance:
        raise PrecisionError(f"R_{n}({xi}) grid not converged: {abs(a - b):.2e}")
    return float(b)


def mask_fourier_fft(n0, third_mode="neutral", count=1024):
    """Fourier coefficients c_l of exp(-n0 cos^2(pi u)) (or 1 minus it), l = -L..L, by FFT.

    Returned as a callable l -> c_l.
    """
    u = np.arange(count) / count
    m = np.exp(-n0 * np.cos(np.pi * u) ** 2)
    if third_mode == "inverse":
        m = 1.0 - m
    c = np.fft.fft(m) / count
    return lambda l: c[np.asarray(l) % count].real


@dataclass
class MCResult(FringeResult):
    """Monte-Carlo fringe estimate with one standard error per component."""

    stderr: np.ndarray = None
    V_sin_stderr: float = 0.0
    samples: int = 0
    seed: int = 0
    inconclusive: bool = False


def classical_mc(
    seq,
    ensemble,
    pulses,
    samples=10**6,
    seed=0,
    third_mode="neutral",
    harmonics=8,
    target=0.02,
    chunk=1 << 17,
    workers=1,
):
    """Classical trajectory simulation of the three-pulse sequence.

    Particles start uniformly over one period with Gaussian transverse
    momenta, are removed at each of the first two pulses with probability
    1 - exp(-n0 cos^2(pi x/d)), receive the dipole kick hbar d(phi)/dx and
    fly freely (with the constant acceleration) in between. The surviving
    density at the third pulse is Fourier-analysed and multiplied by FFT
    coefficients of the third mask.

    Chunks use independent substreams spawned from ``seed`` and are reduced
    in index order, so the result depends only on (samples, seed, chunk).
    ``inconclusive`` is set when the 5 sigma error on V_sin exceeds ``target``.
    """
    if samples < 10**5:
        raise ValueError("classical_mc needs at least 1e5 samples")
    if ensemble.coherence is not None:
        raise ValueError("classical_mc samples the Gaussian momentum distribution only")
    p1, p2, p3 = pulses
    d, mass = seq.d, ensemble.mass
    ell = np.arange(0, harmonics + 1)
    sizes = [chunk] * (samples // chunk) + ([samples % chunk] if samples % chunk else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        rng = np.random.default_rng(streams[i])
        size = sizes[i]
        x1 = rng.uniform(0.0, d, size)
        p = rng.normal(0.0, mass * ensemble.velocity_spread, size)
        r1 = rng.uniform(size=size)
        r2 = rng.uniform(size=size)
        alive, x3 = kernels.trajectories(
            x1, p, r1, r2, p1.n0, p1.phi0, p2.n0, p2.phi0, d, mass, seq.T1, seq.T2, seq.acceleration, HBAR
        )
        ph = np.exp(-2j * np.pi * np.multiply.outer(x3[alive], ell) / d)
        return ph.sum(axis=0), (ph.real**2).sum(axis=0), (ph.imag**2).sum(axis=0)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    total = np.zeros(ell.size, dtype=np.complex128)
    sq_re = np.zeros(ell.size)
    sq_im = np.zeros(ell.size)
    for s, a, b in parts:
        total += s
        sq_re += a
        sq_im += b
    mean = total / samples
    var = (sq_re / samples - mean.real**2) + (sq_im / samples - mean.imag**2)
    err = np.sqrt(np.maximum(var, 0.0) / samples)

    mask = mask_fourier_fft(p3.n0, third_mode)
    comps = mean * mask(-ell)
    errs = err * np.abs(mask(-ell))
    full_ell = np.arange(-harmonics, harmonics + 1)
    full = np.concatenate([np.conj(comps[:0:-1]), comps])
    full_err = np.concatenate([errs[:0:-1], errs])
    s0 = float(comps[0].real)
    if s0 > 0:
        v_sin = 2.0 * abs(comps[1]) / s0
        v_err = v_sin * math.hypot(errs[1] / max(abs(comps[1]), 1e-300), errs[0] / s0) if comps[1] != 0 else 2.0 * errs[1] / s0
        grid = np.arange(512) * (d / 512)
        sig = interferometer.reconstruct(full_ell, full, grid, d)
        smax, smin = sig.max(), sig.min()
        v_full = float(min(max((smax - smin) / (smax + smin), 0.0), 1.0)) if smax + smin > 0 else 0.0
    else:
        v_sin, v_err, v_full = float("nan"), float("inf"), float("nan")
    return MCResult(
        ell=full_ell,
        S_ell=full,
        S0=s0,
        V=v_full,
        V_sin=float(v_sin),
        shift=interferometer.fringe_shift(seq.acceleration, seq.N, seq.T),
        d=d,
        stderr=full_err,
        V_sin_stderr=float(v_err),
        samples=samples,
        seed=seed,
        inconclusive=bool(5.0 * v_err > target),
    )


def bessel_j_series(order, x, digits=20):
    """J_order(x) by direct summation of its power series in high precision."""
    m = abs(int(order))
    with mpmath.workdps(digits + int(abs(x) * 0.87) + 10):
        h = mpmath.mpf(x) / 2
        term = h**m / mpmath.factorial(m)
        total = term
        k = 0
        while True:
            k += 1
            term *= -h * h / (k * (k + m))
            total += term
            if abs(term) < mpmath.mpf(10) ** (-(digits + 5)) * max(abs(total), mpmath.mpf(10) ** -300):
                break
        value = float(total)
    return -value if order < 0 and m % 2 else value


def bessel_i_series(order, z, digits=20):
    """I_order(z) for complex z by direct summation of its power series."""
    m = abs(int(order))
    with mpmath.workdps(digits + int(abs(z) * 0.87) + 10):
        h = mpmath.mpc(z) / 2
        term = h**m / mpmath.factorial(m)
        total = term
        k = 0
        while True:
            k += 1
            term *= h * h / (k * (k + m))
            total += term
            if abs(term) < mpmath.mpf(10) ** (-(digits + 5)) * max(abs(total), mpmath.mpf(10) ** -300):
                break
        return complex(total)


# ---------------------------------------------------------------------------
# verification suite


@dataclass
class Check:
    name: str
    value: complex
    reference: complex
    deviation: float
    tolerance: float
    converged: bool = True

    @property
    def passed(self):
        return self.converged and self.deviation <= self.tolerance


def _check(name, value, oracle_fn, tolerance, relative=False):
    try:
        ref = oracle_fn()
    except PrecisionError:
        return Check(name, value, complex("nan"), math.inf, tolerance, converged=False)
    dev = abs(value - ref)
    if relative:
        dev /= max(abs(ref), 1e-300)
    return Check(name, value, ref, float(dev), tolerance)


def verification_suite(level="fast", seed=0):
    """Compare every fast evaluator with its oracle; returns a list of Check.

    ``fast`` covers Bessel, b_n, B_n (convolution and closed form) and R_n;
    ``full`` adds the classical Monte-Carlo comparison.
    """
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    checks = []
    for order, x in [(0, 1.0), (2, 4.0), (5, 12.5), (20, 30.0), (3, 150.0)]:
        checks.append(_check(f"bessel_j({order}, {x})", specfun.bessel_j(order, x), lambda: bessel_j_series(order, x), 1e-10, True))
    for order, z in [(0, 4.0), (1, -2.0 + 1.0j), (4, 3.0j), (10, 25.0 - 5.0j)]:
        checks.append(_check(f"bessel_i({order}, {z})", specfun.bessel_i(order, z), lambda: bessel_i_series(order, z), 1e-10, True))
    for n0 in (1.0, 8.0):
        for phi0 in (-4.0, 0.0, 4.0):
            pulse = GratingPulse(n0, phi0)
            for n in (0, 1, 3):
                checks.append(
                    _check(f"fourier_b({n}; n0={n0}, phi0={phi0})", grating.fourier_b(n, pulse), lambda: b_by_quadrature(n, pulse), 1e-10)
                )
    for n0, phi0, n, xi in [(8.0, 0.0, 2, 1.0), (8.0, 4.0, 2, 0.7), (5.0, -3.0, 1, 0.35), (3.0, 6.0, -2, 1.6)]:
        pulse = GratingPulse(n0, phi0)
        value = grating.tl_quantum(n, xi, pulse)
        checks.append(_check(f"tl_quantum({n}, {xi}; n0={n0}, phi0={phi0})", value, lambda: B_by_kernel_quadrature(n, xi, pulse), 1e-10))
        checks.append(
            _check(f"tl_closed_form({n}, {xi}; n0={n0}, phi0={phi0})", grating.tl_closed_form(n, xi, pulse), lambda: value, 1e-10)
        )
    for n, xi in [(0, 0.5), (1, 0.5), (2, 0.5), (0, 1.0), (1, 1.0), (2, 1.0)]:
        checks.append(_check(f"rayleigh_R({n}, {xi}; nR=7.2)", grating.rayleigh_R(n, xi, 7.2), lambda: R_by_sphere_quadrature(n, xi, 7.2), 1e-8))
    if level == "full":
        checks.extend(_mc_checks(seed))
    return checks


def _mc_checks(seed):
    from .constants import AMU

    mass = 1e6 * AMU
    d = interferometer.F2_PERIOD
    ensemble = interferometer.EnsembleModel(mass, 1.0, 1e-3)
    pulse = GratingPulse.from_beta(8.0, 1.0)
    out = []
    for frac in (0.3, 1.0):
        seq = interferometer.PulseSequence(T=frac * interferometer.talbot_time(mass, d), d=d)
        model = interferometer.fringe(seq, ensemble, [pulse] * 3, model="classical")
        mc = classical_mc(seq, ensemble, [pulse] * 3, samples=10**6, seed=seed)
        for l in (0, 1):
            dev = abs(model.component(l) - mc.component(l)) / mc.stderr[mc.ell == l][0]
            out.append(Check(f"classical S_{l} at T={frac} T_T (sigma units)", model.component(l), mc.component(l), float(dev), 5.0))
    return out
