"""Pure-numpy implementations of the hot kernels.

These mirror ``_kernels_numba`` one to one. The numpy versions vectorise over
the argument axis and loop over the recurrence index; the numba versions loop
over both. Selected through ``otima._backend``.
"""
import numpy as np

_BIG = 1e250
_SMALL = 1e-250


def i_scaled_table(z, nmax, mstart):
    """exp(-z) I_k(z) for k = 0..nmax by Miller's backward recurrence.

    z : complex array with Re(z) >= 0 and |z| not tiny (callers handle that).
    mstart : starting order, must exceed nmax.
    """
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros((z.size, nmax + 1), dtype=np.complex128)
    two_over_z = 2.0 / z
    f_next = np.zeros(z.size, dtype=np.complex128)
    f = np.ones(z.size, dtype=np.complex128)
    norm = np.zeros(z.size, dtype=np.complex128)
    for k in range(mstart, 0, -1):
        if k <= nmax:
            out[:, k] = f
        norm += 2.0 * f
        f_prev = f_next + k * two_over_z * f
        f_next, f = f, f_prev
        big = np.abs(f) > _BIG
        if big.any():
            f[big] *= _SMALL
            f_next[big] *= _SMALL
            norm[big] *= _SMALL
            out[big] *= _SMALL
    out[:, 0] = f
    norm += f
    return out / norm[:, None]


def j_table(x, nmax, mstart):
    """J_k(x) for k = 0..nmax, x >= 0 and not tiny, by Miller's algorithm.

    Normalised with J_0 + 2 sum_k J_2k = 1.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros((x.size, nmax + 1), dtype=np.float64)
    two_over_x = 2.0 / x
    f_next = np.zeros(x.size)
    f = np.ones(x.size)
    norm = np.zeros(x.size)
    for k in range(mstart, 0, -1):
        if k <= nmax:
            out[:, k] = f
        if k % 2 == 0:
            norm += 2.0 * f
        f_prev = k * two_over_x * f - f_next
        f_next, f = f, f_prev
        big = np.abs(f) > _BIG
        if big.any():
            f[big] *= _SMALL
            f_next[big] *= _SMALL
            norm[big] *= _SMALL
            out[big] *= _SMALL
    out[:, 0] = f
    norm += f
    return out / norm[:, None]


def tl_sum(b, jmax, ns, xis):
    """B_n(xi) = sum_j b_j conj(b_{j-n}) exp(i pi xi (n - 2j)) for paired (n, xi).

    b holds b_j at index j + jmax for j in [-jmax, jmax].
    """
    ns = np.asarray(ns, dtype=np.int64)
    xis = np.asarray(xis, dtype=np.float64)
    j = np.arange(-jmax, jmax + 1)
    k = j[None, :] - ns[:, None]
    valid = np.abs(k) <= jmax
    partner = np.where(valid, np.conj(b[np.clip(k + jmax, 0, 2 * jmax)]), 0.0)
    phase = np.exp(1j * np.pi * xis[:, None] * (ns[:, None] - 2 * j[None, :]))
    return np.sum(b[None, :] * partner * phase, axis=1)


def trajectories(x1, p, r1, r2, n01, phi01, n02, phi02, d, mass, t1, t2, accel, hbar):
    """Classical point-particle passage through two pulsed gratings.

    Returns (alive, x3) where alive flags particles that survived both
    ionizing pulses and x3 is the position folded into [0, d) at t1 + t2.
    """
    k = np.pi / d
    alive = r1 < np.exp(-n01 * np.cos(k * x1) ** 2)
    p1 = p - hbar * phi01 * k * np.sin(2.0 * k * x1)
    x2 = x1 + p1 * t1 / mass + 0.5 * accel * t1 * t1
    alive &= r2 < np.exp(-n02 * np.cos(k * x2) ** 2)
    p2 = p1 + mass * accel * t1 - hbar * phi02 * k * np.sin(2.0 * k * x2)
    x3 = x2 + p2 * t2 / mass + 0.5 * accel * t2 * t2
    return alive, np.mod(x3, d)
