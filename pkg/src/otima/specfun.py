"""Integer-order Bessel functions J_n, I_n and the spherical j0, j1/x.

J_n and I_n are evaluated by Miller's backward recurrence, which produces the
whole table of orders 0..nmax in one pass. That is what the grating code needs
anyway (all Fourier coefficients of a pulse at once), so the single-order
functions are thin wrappers around the table routines.
"""
import math

import numpy as np

from ._backend import kernels
from .errors import DomainError

MAX_ORDER = 200
MAX_ARGUMENT = 500.0

# below this |z| the two-term power series is exact to double precision
_TINY = 1e-8
# j1(x)/x switches to its Taylor series below this |x|
SPHERICAL_SERIES_THRESHOLD = 1e-3


def miller_start(nmax, absz):
    """Starting order for the backward recurrence."""
    return int(nmax + absz + 10.0 * math.sqrt(absz) + 30)


def _series_table(nmax, z, sign):
    # leading two terms of sum_m (z/2)^(2m+k) / (m! (m+k)!), sign=-1 gives J
    z = np.asarray(z)
    half = z / 2.0
    out = np.empty((z.size, nmax + 1), dtype=np.result_type(z, float))
    term = np.ones(z.size, dtype=out.dtype)
    for k in range(nmax + 1):
        out[:, k] = term * (1.0 + sign * half * half / (k + 1))
        term = term * half / (k + 1)
    return out


def bessel_j_table(nmax, x):
    """J_k(x) for k = 0..nmax; x is a real scalar or 1-d array.

    Returns an array of shape (len(x), nmax + 1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    ax = np.abs(x)
    out = np.empty((x.size, nmax + 1))
    tiny = ax < _TINY
    if tiny.any():
        out[tiny] = _series_table(nmax, ax[tiny], -1.0)
    big = ~tiny
    if big.any():
        out[big] = kernels.j_table(ax[big], nmax, miller_start(nmax, ax[big].max()))
    neg = x < 0
    if neg.any():
        out[neg, 1::2] *= -1.0
    return out


def bessel_i_table(nmax, z, scaled=False):
    """I_k(z) for k = 0..nmax and complex z (scalar or 1-d array).

    With ``scaled=True`` the result is multiplied by exp(-|Re z|), which keeps
    it bounded for large real arguments.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    flip = z.real < 0
    zp = np.where(flip, -z, z)
    out = np.empty((z.size, nmax + 1), dtype=np.complex128)
    tiny = np.abs(zp) < _TINY
    if tiny.any():
        out[tiny] = _series_table(nmax, zp[tiny], 1.0) * np.exp(-zp[tiny].real)[:, None]
    big = ~tiny
    if big.any():
        zb = zp[big]
        table = kernels.i_scaled_table(zb, nmax, miller_start(nmax, np.abs(zb).max()))
        # table holds exp(-z') I_k(z'); turn it into exp(-Re z') I_k(z')
        out[big] = table * np.exp(1j * zb.imag)[:, None]
    if flip.any():
        out[flip, 1::2] *= -1.0
    if not scaled:
        out *= np.exp(np.abs(z.real))[:, None]
    return out


def _check(order, absz):
    if abs(order) > MAX_ORDER:
        raise DomainError(f"order {order} outside |order| <= {MAX_ORDER}")
    if not absz <= MAX_ARGUMENT:
        raise DomainError(f"argument magnitude {absz} outside [0, {MAX_ARGUMENT}]")


def bessel_j(order, x):
    """Bessel function of the first kind J_order(x) for integer order, real x."""
    order = int(order)
    x = float(x)
    _check(order, abs(x))
    m = abs(order)
    value = bessel_j_table(m, x)[0, m]
    if order < 0 and m % 2:
        value = -value
    return float(value)


def bessel_i(order, z):
    """Modified Bessel function I_order(z) for integer order, complex z."""
    order = int(order)
    z = complex(z)
    _check(order, abs(z))
    m = abs(order)
    value = complex(bessel_i_table(m, z)[0, m])
    if z.imag == 0.0:
        value = complex(value.real, 0.0)
    return value


def spherical_j0(x):
    """sin(x)/x with the limit 1 at x = 0."""
    x = np.asarray(x, dtype=np.float64)
    return np.sinc(x / np.pi)


def spherical_j1_over_x(x):
    """j1(x)/x = (sin x - x cos x)/x^3, with a Taylor series near 0.

    The series 1/3 - x^2/30 + x^4/840 is used for |x| < 1e-3, where the closed
    form loses digits to cancellation; its truncation error there is < 1e-18.
    """
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < SPHERICAL_SERIES_THRESHOLD
    xs = np.where(small, 1.0, x)
    direct = (np.sin(xs) - xs * np.cos(xs)) / xs**3
    x2 = x * x
    series = 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)
