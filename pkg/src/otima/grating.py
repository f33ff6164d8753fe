"""Single-pulse optics: transmission function and Talbot-Lau coefficients.

A pulse is described by three numbers: ``n0``, the mean number of photons
absorbed at an antinode; ``phi0``, the peak dipole phase; ``nR``, the mean
number of Rayleigh-scattered photons at an antinode. Positive ``phi0`` means a
high-field seeker (beta > 0).

Coefficient functions broadcast over ``n`` and ``xi`` and accept any real
``xi``, including negative values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from ._backend import kernels
from .errors import PrecisionError

# relative size of the last Fourier coefficient kept in the convolution sum
B_TRUNCATION = 1e-16


@dataclass(frozen=True)
class GratingPulse:
    n0: float = 0.0
    phi0: float = 0.0
    nR: float = 0.0

    def __post_init__(self):
        if not self.n0 >= 0:
            raise ValueError("n0 must be >= 0")
        if not self.nR >= 0:
            raise ValueError("nR must be >= 0")
        if not math.isfinite(self.phi0):
            raise ValueError("phi0 must be finite")

    @classmethod
    def from_beta(cls, n0, beta, rayleigh_ratio=0.0):
        """Pulse for a particle with absorption/phase ratio ``beta``.

        phi0 = n0 / (2 beta) and nR = n0 * sigma_R / sigma_abs.
        """
        phi0 = 0.0 if n0 == 0 else n0 / (2.0 * beta)
        return cls(n0=n0, phi0=phi0, nR=n0 * rayleigh_ratio)

    @property
    def beta(self):
        return math.inf if self.phi0 == 0 else self.n0 / (2.0 * self.phi0)

    def without_scattering(self):
        return GratingPulse(self.n0, self.phi0, 0.0)


def _scalar_or_array(value, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return value.reshape(()).item() if isinstance(value, np.ndarray) else value
    return value


def transmission(x, d, pulse: GratingPulse):
    """Complex amplitude transmission exp[(-n0/2 + i phi0) cos^2(pi x / d)]."""
    x = np.asarray(x, dtype=np.float64)
    c2 = np.cos(np.pi * x / d) ** 2
    return _scalar_or_array(np.exp((-0.5 * pulse.n0 + 1j * pulse.phi0) * c2), x)


def fourier_table(pulse: GratingPulse):
    """Fourier coefficients b_j of the transmission for j = -J..J.

    Returns ``(b, J)`` with ``b[j + J] = b_j``. J is the first order where
    |b_J| < 1e-16 max|b_j|, recomputed for every pulse.
    """
    w = complex(-0.25 * pulse.n0, 0.5 * pulse.phi0)
    nmax = int(abs(w) + 10.0 * math.sqrt(abs(w)) + 25)
    scaled = specfun.bessel_i_table(nmax, w, scaled=True)[0]
    # exp(w) I_k(w) = exp(w + |Re w|) * [exp(-|Re w|) I_k(w)]
    half = scaled * np.exp(w + abs(w.real))
    mag = np.abs(half)
    below = np.nonzero(mag < B_TRUNCATION * mag.max())[0]
    if below.size == 0:
        raise PrecisionError(f"Fourier series of the transmission not converged within {nmax} orders")
    J = int(below[0])
    b = np.concatenate([half[J:0:-1], half[: J + 1]])
    return b, J


def fourier_b(n, pulse: GratingPulse):
    """b_n = exp(-n0/4 + i phi0/2) I_n(-n0/4 + i phi0/2)."""
    b, J = fourier_table(pulse)
    n = np.asarray(n, dtype=np.int64)
    inside = np.abs(n) <= J
    out = np.where(inside, b[np.clip(n + J, 0, 2 * J)], 0.0)
    return _scalar_or_array(out.astype(np.complex128), n)


def tl_quantum(n, xi, pulse: GratingPulse):
    """Quantum Talbot-Lau coefficient B_n(xi) as a convolution of b_j.

    B_n(xi) = sum_j b_j conj(b_{j-n}) exp(i pi xi (n - 2j)); exactly zero for
    |n| > 2J.
    """
    n_arr, xi_arr = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(xi, dtype=np.float64))
    b, J = fourier_table(pulse)
    out = kernels.tl_sum(b, J, np.ascontiguousarray(n_arr).ravel(), np.ascontiguousarray(xi_arr).ravel())
    return _scalar_or_array(out.reshape(n_arr.shape), n, xi)


def tl_mask(n, n0):
    """Mask coefficient B_n(0) = exp(-n0/2) I_n(-n0/2), real."""
    n = np.asarray(n, dtype=np.int64)
    m = int(np.abs(n).max()) if n.size else 0
    table = specfun.bessel_i_table(m, -0.5 * n0, scaled=True)[0].real
    return _scalar_or_array(table[np.abs(n)], n)


def inverse_mask(n, n0):
    """Mask coefficient for ion counting, delta_{n,0} - exp(-n0/2) I_n(-n0/2)."""
    n = np.asarray(n, dtype=np.int64)
    out = (n == 0) - np.asarray(tl_mask(n, n0), dtype=np.float64)
    if np.any(n == 0):
        out = np.where(n == 0, _one_minus_mask0(n0), out)
    return _scalar_or_array(out, n)


def _one_minus_mask0(n0):
    # 1 - exp(-x) I_0(x) without cancellation for small x
    x = 0.5 * n0
    if x >= 1.0:
        return 1.0 - float(tl_mask(0, n0))
    q, term, tail = 0.25 * x * x, 1.0, 0.0
    for k in range(1, 40):
        term *= q / (k * k)
        tail += term
        if term < 1e-17 * tail:
            break
    return -math.expm1(-x) - math.exp(-x) * tail


def _bessel_pair_sum(n, zeta_coh, zeta_ion, n0):
    """exp(-n0/2) sum_k J_k(zeta_coh) I_{n-k}(-zeta_ion), with zeta_ion scalar.

    Branch-free form of the closed Talbot-Lau expression: it is the Fourier
    coefficient of exp(i zeta_coh sin t - zeta_ion cos t).
    """
    zc = np.atleast_1d(np.asarray(zeta_coh, dtype=np.float64))
    kj = int(np.abs(zc).max() + 10.0 * math.sqrt(np.abs(zc).max()) + 25)
    ki = int(abs(zeta_ion) + 10.0 * math.sqrt(abs(zeta_ion)) + 25)
    jt = specfun.bessel_j_table(kj, zc)
    sign = (-1.0) ** np.arange(1, kj + 1)
    jfull = np.concatenate([jt[:, :0:-1] * sign[::-1], jt], axis=1)  # k = -kj..kj
    it = specfun.bessel_i_table(ki, -zeta_ion, scaled=True)[0].real
    it = it * math.exp(abs(zeta_ion) - 0.5 * n0)
    k = np.arange(-kj, kj + 1)
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    out = np.empty((zc.size, n.size))
    for col, nn in enumerate(n):
        m = np.abs(nn - k)
        ok = m <= ki
        out[:, col] = jfull[:, ok] @ it[m[ok]]
    return out


def tl_classical(n, xi, pulse: GratingPulse):
    """Classical counterpart of B_n(xi): zeta_ion = n0/2, zeta_coh = phi0 pi xi."""
    n_arr, xi_arr = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(xi, dtype=np.float64))
    flat_n = n_arr.ravel()
    flat_xi = xi_arr.ravel()
    out = np.empty(flat_n.size, dtype=np.complex128)
    for nn in np.unique(flat_n):
        sel = flat_n == nn
        zc = pulse.phi0 * math.pi * flat_xi[sel]
        out[sel] = _bessel_pair_sum([nn], zc, 0.5 * pulse.n0, pulse.n0)[:, 0]
    return _scalar_or_array(out.reshape(n_arr.shape), n, xi)


def zeta_quantum(xi, pulse):
    """(zeta_ion, zeta_coh) = (n0 cos(pi xi) / 2, phi0 sin(pi xi))."""
    xi = np.asarray(xi, dtype=np.float64)
    return 0.5 * pulse.n0 * np.cos(np.pi * xi), pulse.phi0 * np.sin(np.pi * xi)


def tl_closed_form(n, xi, pulse: GratingPulse, kind="quantum"):
    """Talbot-Lau coefficient from the closed Bessel-J expression.

    exp(-n0/2) [(zc - zi)/(zc + zi)]^(n/2) J_n(sgn(zc + zi) sqrt(zc^2 - zi^2)).

    When zc^2 < zi^2 the square root is imaginary and J_n is continued through
    J_n(i y) = i^n I_n(y). Returns nan on the measure-zero set zc + zi = 0 or
    zc = zi, where the expression is undefined. Kept as a cross-check of
    ``tl_quantum`` and ``tl_classical``.
    """
    n_arr, xi_arr = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(xi, dtype=np.float64))
    if kind == "quantum":
        zi, zc = zeta_quantum(xi_arr, pulse)
    elif kind == "classical":
        zi = np.full(xi_arr.shape, 0.5 * pulse.n0)
        zc = pulse.phi0 * np.pi * xi_arr
    else:
        raise ValueError(f"unknown kind {kind!r}")
    out = np.full(n_arr.shape, np.nan)
    flat = out.reshape(-1)
    for idx, (nn, a, c) in enumerate(zip(n_arr.ravel(), zi.ravel(), zc.ravel())):
        s = c + a
        if s == 0.0 or c == a:
            continue
        ratio = (c - a) / s
        disc = c * c - a * a
        m = abs(int(nn))
        if disc > 0:
            arg = math.copysign(math.sqrt(disc), s)
            value = ratio ** (nn / 2.0) * specfun.bessel_j_table(m, arg)[0, m]
            if nn < 0 and m % 2:
                value = -value
        else:
            y = math.sqrt(-disc)
            # |r|^(n/2) i^n (sgn s i)^n I_n(y) = |r|^(n/2) (-sgn s)^n I_n(y)
            iy = specfun.bessel_i_table(m, y, scaled=True)[0, m].real
            value = abs(ratio) ** (nn / 2.0) * (-math.copysign(1.0, s)) ** m * iy
            flat[idx] = value * math.exp(y - 0.5 * pulse.n0)
            continue
        flat[idx] = value * math.exp(-0.5 * pulse.n0)
    return _scalar_or_array(out, n, xi)


# ---------------------------------------------------------------------------
# Rayleigh scattering


def dipole_average(kappa):
    """Average of exp(i kappa u_x) over the dipole pattern 3 sin^2(theta) / 8 pi.

    kappa = k_L s; the polarisation is perpendicular to x. Equals
    (3/2) [j0(kappa) - j1(kappa)/kappa].
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    return 1.5 * (specfun.spherical_j0(kappa) - specfun.spherical_j1_over_x(kappa))


def _rayleigh_parts(xi, nR):
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    x = np.pi * xi
    k = specfun.spherical_j0(x) - specfun.spherical_j1_over_x(x)
    c = np.cos(x)
    scale = 0.75 * nR
    return scale * (c * k - 2.0 / 3.0), scale * (k - 2.0 / 3.0 * c)


def rayleigh_table(nmax, xi, nR):
    """R_n(xi) for n = -nmax..nmax; shape (len(xi), 2 nmax + 1)."""
    expo, arg = _rayleigh_parts(xi, nR)
    out = np.empty((expo.size, 2 * nmax + 1))
    for row, (e, a) in enumerate(zip(expo, arg)):
        t = specfun.bessel_i_table(nmax, a, scaled=True)[0].real * math.exp(e + abs(a))
        out[row, nmax:] = t
        out[row, :nmax] = t[:0:-1]
    return out


def _rayleigh_order_bound(xi, nR):
    _, arg = _rayleigh_parts(xi, nR)
    a = float(np.abs(arg).max())
    return int(a + 10.0 * math.sqrt(a) + 25)


def rayleigh_R(n, xi, nR):
    """Fourier coefficient R_n(xi) of the Rayleigh decoherence kernel.

    exp{(3 nR/4)[cos(pi xi) K - 2/3]} I_n[(3 nR/4)(K - (2/3) cos(pi xi))]
    with K = j0(pi xi) - j1(pi xi)/(pi xi).
    """
    n_arr, xi_arr = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(xi, dtype=np.float64))
    flat_n = n_arr.ravel()
    flat_xi = xi_arr.ravel()
    out = np.empty(flat_n.size)
    for i, (nn, x) in enumerate(zip(flat_n, flat_xi)):
        m = abs(int(nn))
        expo, arg = _rayleigh_parts(x, nR)
        t = specfun.bessel_i_table(m, arg[0], scaled=True)[0, m].real
        out[i] = t * math.exp(expo[0] + abs(arg[0]))
    return _scalar_or_array(out.reshape(n_arr.shape), n, xi)


def decoherence_function(x, xp, nR, d):
    """eta(x, x') multiplying the density matrix after Rayleigh scattering."""
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    k = np.pi / d
    phi = dipole_average(k * (xp - x))
    ck, ckp = np.cos(k * x), np.cos(k * xp)
    return np.exp(0.5 * nR * (2.0 * phi * ck * ckp - ck**2 - ckp**2))


def tl_decohered(n, xi, pulse: GratingPulse):
    """Talbot-Lau coefficient including Rayleigh scattering, sum_j R_{n-j}(xi) B_j(xi)."""
    if pulse.nR == 0:
        return tl_quantum(n, xi, pulse)
    n_arr, xi_arr = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(xi, dtype=np.float64))
    flat_n = n_arr.ravel()
    flat_xi = xi_arr.ravel()
    _, J = fourier_table(pulse)
    jb = np.arange(-2 * J, 2 * J + 1)
    out = np.empty(flat_n.size, dtype=np.complex128)
    for x in np.unique(flat_xi):
        sel = np.nonzero(flat_xi == x)[0]
        bj = np.asarray(tl_quantum(jb, np.full(jb.size, x), pulse))
        nmax = _rayleigh_order_bound(x, pulse.nR) + int(np.abs(flat_n[sel]).max()) + 2 * J
        rt = rayleigh_table(nmax, x, pulse.nR)[0]
        for i in sel:
            out[i] = np.dot(rt[flat_n[i] - jb + nmax], bj)
    return _scalar_or_array(out.reshape(n_arr.shape), n, xi)


COEFFICIENTS = {
    "quantum": tl_quantum,
    "classical": tl_classical,
    "decohered": tl_decohered,
}
