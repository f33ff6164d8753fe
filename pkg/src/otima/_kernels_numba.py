"""numba-compiled versions of the hot kernels (see ``_kernels_numpy``)."""
import math

import numpy as np
from numba import njit

_BIG = 1e250
_SMALL = 1e-250


@njit(cache=True)
def i_scaled_table(z, nmax, mstart):
    out = np.zeros((z.size, nmax + 1), dtype=np.complex128)
    for i in range(z.size):
        two_over_z = 2.0 / z[i]
        f_next = 0j
        f = 1.0 + 0j
        norm = 0j
        for k in range(mstart, 0, -1):
            if k <= nmax:
                out[i, k] = f
            norm += 2.0 * f
            f_prev = f_next + k * two_over_z * f
            f_next = f
            f = f_prev
            if abs(f) > _BIG:
                f *= _SMALL
                f_next *= _SMALL
                norm *= _SMALL
                for q in range(nmax + 1):
                    out[i, q] *= _SMALL
        out[i, 0] = f
        norm += f
        for q in range(nmax + 1):
            out[i, q] /= norm
    return out


@njit(cache=True)
def j_table(x, nmax, mstart):
    out = np.zeros((x.size, nmax + 1), dtype=np.float64)
    for i in range(x.size):
        two_over_x = 2.0 / x[i]
        f_next = 0.0
        f = 1.0
        norm = 0.0
        for k in range(mstart, 0, -1):
            if k <= nmax:
                out[i, k] = f
            if k % 2 == 0:
                norm += 2.0 * f
            f_prev = k * two_over_x * f - f_next
            f_next = f
            f = f_prev
            if abs(f) > _BIG:
                f *= _SMALL
                f_next *= _SMALL
                norm *= _SMALL
                for q in range(nmax + 1):
                    out[i, q] *= _SMALL
        out[i, 0] = f
        norm += f
        for q in range(nmax + 1):
            out[i, q] /= norm
    return out


@njit(cache=True)
def tl_sum(b, jmax, ns, xis):
    out = np.empty(ns.size, dtype=np.complex128)
    for i in range(ns.size):
        n = ns[i]
        xi = xis[i]
        lo = max(-jmax, n - jmax)
        hi = min(jmax, n + jmax)
        acc = 0j
        for j in range(lo, hi + 1):
            ph = math.pi * xi * (n - 2 * j)
            acc += b[j + jmax] * np.conj(b[j - n + jmax]) * complex(math.cos(ph), math.sin(ph))
        out[i] = acc
    return out


@njit(cache=True)
def trajectories(x1, p, r1, r2, n01, phi01, n02, phi02, d, mass, t1, t2, accel, hbar):
    k = math.pi / d
    alive = np.empty(x1.size, dtype=np.bool_)
    x3 = np.empty(x1.size, dtype=np.float64)
    for i in range(x1.size):
        xa = x1[i]
        ok = r1[i] < math.exp(-n01 * math.cos(k * xa) ** 2)
        p1 = p[i] - hbar * phi01 * k * math.sin(2.0 * k * xa)
        xb = xa + p1 * t1 / mass + 0.5 * accel * t1 * t1
        ok = ok and (r2[i] < math.exp(-n02 * math.cos(k * xb) ** 2))
        p2 = p1 + mass * accel * t1 - hbar * phi02 * k * math.sin(2.0 * k * xb)
        xc = xb + p2 * t2 / mass + 0.5 * accel * t2 * t2
        alive[i] = ok
        x3[i] = xc - d * math.floor(xc / d)
    return alive, x3
