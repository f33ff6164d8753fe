"""Three-pulse interferometer: fringe patterns, detection signal and visibility.

Densities and signals are reported per grating period; the 1/cloud-extension
normalisation is dropped everywhere, so a uniform cloud that passes all pulses
has density 1 and signal 1.

Sign conventions. The fringe pattern under a constant acceleration ``a`` is
displaced by ``-fringe_shift(a, N, T) = (a/2) N (N+1) T^2``. The signal
coordinate ``x_S`` is the displacement of the fringe pattern relative to the
third grating, so acceleration and ``x_S`` add:
``S_a(x_S) = S_0(x_S - fringe_shift(a, N, T))``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import grating
from .constants import HBAR, PLANCK
from .errors import DegenerateSignalError, PrecisionError
from .grating import GratingPulse

F2_PERIOD = 157.63094e-9 / 2.0

# Fourier components of the signal below this fraction of S0 are dropped
SIGNAL_TRUNCATION = 1e-14
MAX_HARMONIC = 64
THIRD_MODES = ("neutral", "inverse")


@dataclass(frozen=True)
class PulseSequence:
    """Pulse timing: G1 at 0, G2 at T, G3 at (N + 1) T + tau."""

    T: float
    N: int = 1
    tau: float = 0.0
    acceleration: float = 0.0
    d: float = F2_PERIOD

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be > 0")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be an integer >= 1")
        if not abs(self.tau) < self.T:
            raise ValueError("|tau| must be smaller than T")
        if not self.d > 0:
            raise ValueError("grating period d must be > 0")

    @property
    def T1(self):
        return self.T

    @property
    def T2(self):
        return self.N * self.T + self.tau


@dataclass(frozen=True)
class EnsembleModel:
    """Particle cloud: mass, transverse velocity spread and extension.

    ``coherence`` optionally replaces the Gaussian coherence function; it maps
    a separation s (m) to D~(s). ``cloud_extension`` only enters as a
    normalisation and is checked against the grating period.
    """

    mass: float
    velocity_spread: float
    cloud_extension: float = 1e-3
    coherence: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be > 0")
        if not self.velocity_spread > 0:
            raise ValueError("velocity spread must be > 0")
        if not self.cloud_extension > 0:
            raise ValueError("cloud extension must be > 0")

    def check_extension(self, d):
        if self.cloud_extension < 100 * d:
            raise ValueError(
                f"cloud extension {self.cloud_extension:g} m must cover at least 100 grating periods"
            )
        if self.cloud_extension < 1000 * d:
            warnings.warn("cloud extension below 1000 grating periods; the uniform-cloud model is marginal", stacklevel=3)


@dataclass
class FringeResult:
    """Fourier content of the detection signal S(x_S) = sum_l S_l exp(2 pi i l x_S / d).

    ``S_ell`` already contains the acceleration phase; ``shift`` is the fringe
    shift delta x of the density pattern.
    """

    ell: np.ndarray
    S_ell: np.ndarray
    S0: float
    V: float
    V_sin: float
    shift: float
    d: float

    def component(self, l):
        idx = np.nonzero(self.ell == l)[0]
        return self.S_ell[idx[0]] if idx.size else 0j

    def signal(self, x_s):
        return reconstruct(self.ell, self.S_ell, x_s, self.d)


def talbot_time(mass, d):
    """T_T = m d^2 / h."""
    return mass * d * d / PLANCK


def coherence_ft(ensemble: EnsembleModel, s):
    """Coherence function D~(s); Gaussian exp(-(s m dv)^2 / 2 hbar^2) by default."""
    s = np.asarray(s, dtype=np.float64)
    if ensemble.coherence is not None:
        return np.asarray(ensemble.coherence(s), dtype=np.float64)
    width = ensemble.mass * ensemble.velocity_spread / HBAR
    return np.exp(-0.5 * (s * width) ** 2)


def fringe_shift(a, N, T):
    """delta x = -(a/2) N (N + 1) T^2."""
    return -0.5 * a * N * (N + 1) * T * T


def reconstruct(ell, comps, x, d):
    """Real part of sum_l comps_l exp(2 pi i l x / d) on an array of x."""
    x = np.asarray(x, dtype=np.float64)
    phase = np.exp(2j * np.pi * np.multiply.outer(x, ell) / d)
    return (phase @ comps).real


def _coefficients(model):
    try:
        return grating.COEFFICIENTS[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}; expected one of {sorted(grating.COEFFICIENTS)}") from None


def _mask(n, pulse, third_mode):
    if third_mode == "neutral":
        return np.asarray(grating.tl_mask(n, pulse.n0), dtype=np.complex128)
    if third_mode == "inverse":
        return np.asarray(grating.inverse_mask(n, pulse.n0), dtype=np.complex128)
    raise ValueError(f"unknown third-grating mode {third_mode!r}")


def _resonant_terms(seq, ensemble, pulses, ell, model):
    coeff = _coefficients(model)
    tt = talbot_time(ensemble.mass, seq.d)
    ell = np.asarray(ell)
    b1 = np.asarray(coeff(-seq.N * ell, ell * seq.tau / tt, pulses[0]), dtype=np.complex128)
    b2 = np.asarray(coeff((seq.N + 1) * ell, ell * seq.T2 / tt, pulses[1]), dtype=np.complex128)
    weight = coherence_ft(ensemble, ell * seq.d * seq.tau / tt)
    return weight * b1 * b2


def _truncate(ell, comps, what):
    scale = abs(comps[ell == 0][0])
    if scale == 0:
        scale = np.abs(comps).max()
    keep = np.abs(comps) > SIGNAL_TRUNCATION * scale
    last = int(ell[keep].max()) if keep.any() else 0
    if last >= MAX_HARMONIC:
        raise PrecisionError(
            f"{what}: harmonic {MAX_HARMONIC} still at {abs(comps[-1]) / scale:.2e} of the mean; "
            "Fourier series not converged"
        )
    return last


def _resonant_components(seq, ensemble, pulses, model, third_mode=None):
    ensemble.check_extension(seq.d)
    pos = np.arange(0, MAX_HARMONIC + 1)
    comps = _resonant_terms(seq, ensemble, pulses, pos, model)
    if third_mode is not None:
        comps = comps * _mask(-pos, pulses[2], third_mode)
    L = _truncate(pos, comps, "signal" if third_mode else "density")
    ell = np.arange(-L, L + 1)
    neg = np.arange(-L, 0)
    neg_comps = _resonant_terms(seq, ensemble, pulses, neg, model)
    if third_mode is not None:
        neg_comps = neg_comps * _mask(-neg, pulses[2], third_mode)
    comps = np.concatenate([neg_comps, comps[: L + 1]])
    # pattern displaced by -delta x
    disp = -fringe_shift(seq.acceleration, seq.N, seq.T)
    comps = comps * np.exp(2j * np.pi * ell * disp / seq.d)
    return ell, comps


def density_components(seq, ensemble, pulses, model="quantum"):
    """Fourier components of the density right before the third pulse."""
    return _resonant_components(seq, ensemble, pulses[:2], model)


def density_resonant(seq: PulseSequence, ensemble: EnsembleModel, pulses: Sequence[GratingPulse], x_grid, model="quantum"):
    """Density w(x) at time (N + 1) T + tau in the resonance approximation.

    Only the first two pulses are used. Real and d-periodic.
    """
    ell, comps = density_components(seq, ensemble, pulses, model)
    return reconstruct(ell, comps, x_grid, seq.d)


def density_components_general(T1, T2, ensemble, pulses, d, acceleration=0.0, model="quantum"):
    """Fourier components of the density after delays T1, T2, from the full double sum.

    w_l = sum_n D~(d (n T1 + l T2) / T_T) B1_n((n T1 + l T2) / T_T) B2_{l-n}(l T2 / T_T)
    with an acceleration phase per (n, l) term.
    """
    ensemble.check_extension(d)
    coeff = _coefficients(model)
    tt = talbot_time(ensemble.mass, d)
    p1, p2 = pulses[0], pulses[1]
    _, J1 = grating.fourier_table(p1)
    nmax = 2 * J1
    if model == "decohered" and p1.nR > 0:
        nmax += grating._rayleigh_order_bound(np.linspace(-3, 3, 61), p1.nR)
    elif model == "classical":
        nmax = int(p1.n0 + 2 * abs(p1.phi0) * math.pi * (abs(T1) + MAX_HARMONIC * abs(T2)) / tt) + 30
    n = np.arange(-nmax, nmax + 1)

    def comps_for(ells):
        out = np.zeros(len(ells), dtype=np.complex128)
        for i, l in enumerate(ells):
            arg = (n * T1 + l * T2) / tt
            weight = coherence_ft(ensemble, d * arg)
            live = np.abs(weight) > 1e-30
            if not live.any():
                continue
            nn = n[live]
            b1 = np.asarray(coeff(nn, arg[live], p1), dtype=np.complex128)
            b2 = np.asarray(coeff(l - nn, np.full(nn.size, l * T2 / tt), p2), dtype=np.complex128)
            # gratings fixed in the lab while the particles fall
            phase = acceleration * (l * (T1 + T2) ** 2 - (l - nn) * T1**2) / (2.0 * d)
            out[i] = np.sum(weight[live] * b1 * b2 * np.exp(2j * np.pi * phase))
        return out

    pos = np.arange(0, MAX_HARMONIC + 1)
    comps = comps_for(pos)
    L = _truncate(pos, comps, "density")
    neg = np.arange(-L, 0)
    return np.arange(-L, L + 1), np.concatenate([comps_for(neg), comps[: L + 1]])


def density_general(T1, T2, ensemble, pulses, x_grid, d=F2_PERIOD, acceleration=0.0, model="quantum"):
    """Density w(x) after delays T1 and T2 without the resonance approximation."""
    ell, comps = density_components_general(T1, T2, ensemble, pulses, d, acceleration, model)
    return reconstruct(ell, comps, x_grid, d)


def signal_components(seq, ensemble, pulses, third_mode="neutral", model="quantum"):
    """(ell, S_ell) of the detection signal, acceleration phase included."""
    return _resonant_components(seq, ensemble, pulses, model, third_mode)


def _sin_visibility(ell, comps):
    s0 = comps[ell == 0][0].real
    if not s0 > 0:
        raise DegenerateSignalError("mean signal S0 vanishes; visibility undefined")
    s1 = comps[ell == 1][0] if (ell == 1).any() else 0.0
    return 2.0 * abs(s1) / s0


def _full_visibility(ell, comps, d, grid_size):
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    if not comps[ell == 0][0].real > 0:
        raise DegenerateSignalError("mean signal S0 vanishes; visibility undefined")
    x = np.arange(grid_size) * (d / grid_size)
    s = reconstruct(ell, comps, x, d)
    smax, smin = s.max(), s.min()
    return float(min(max((smax - smin) / (smax + smin), 0.0), 1.0))


def fringe(seq, ensemble, pulses, third_mode="neutral", model="quantum", grid_size=512) -> FringeResult:
    """Signal components together with S0, V and V_sin."""
    ell, comps = signal_components(seq, ensemble, pulses, third_mode, model)
    return FringeResult(
        ell=ell,
        S_ell=comps,
        S0=float(comps[ell == 0][0].real),
        V=_full_visibility(ell, comps, seq.d, grid_size),
        V_sin=_sin_visibility(ell, comps),
        shift=fringe_shift(seq.acceleration, seq.N, seq.T),
        d=seq.d,
    )


def signal(seq, ensemble, pulses, x_s, third_mode="neutral", model="quantum"):
    """Detection signal S(x_S): transmitted neutrals, or ions for ``third_mode="inverse"``."""
    ell, comps = signal_components(seq, ensemble, pulses, third_mode, model)
    out = reconstruct(ell, comps, x_s, seq.d)
    return float(out) if np.ndim(x_s) == 0 else out


def visibility_sin(seq, ensemble, pulses, third_mode="neutral", model="quantum"):
    """Sinusoidal visibility 2|S_1| / S0; may exceed 1."""
    return _sin_visibility(*signal_components(seq, ensemble, pulses, third_mode, model))


def visibility_full(seq, ensemble, pulses, grid_size=512, third_mode="neutral", model="quantum"):
    """(S_max - S_min) / (S_max + S_min) from ``grid_size`` samples over one period."""
    ell, comps = signal_components(seq, ensemble, pulses, third_mode, model)
    return _full_visibility(ell, comps, seq.d, grid_size)
