"""Scan drivers behind the command line: delay, power and signal scans,
material reports and the verification run.

Every table is written as CSV preceded by the resolved configuration as
``#``-prefixed INI lines, so ``config_from_csv`` can rebuild the run.

Column schema
-------------
delay / tau scans
    axis column (``T_over_TT``, ``T_ms`` or ``tau_ns``), then for each curve
    family and detection mode ``V_sin_<model>``, ``V_full_<model>`` per
    requested model, and ``S0``.
power scans
    ``n0_axis`` (or ``energy_mJ_axis``), then ``V_sin_<model>``,
    ``V_full_<model>`` and ``S0`` per family and mode.
signal scans
    axis column (``x_s_over_d``, ``x_s_nm``, ``T_over_TT``, ``T_ms`` or
    ``tau_ns``), then ``S_<model>`` per family and mode.

A column gets the suffix ``_<mode>`` when both detection modes are requested
and ``_<family>`` (material name, ``m<mass>`` or ``beta<value>``) when the
configuration lists several particles. Undefined points (vanishing mean
signal) are written as ``nan``.
"""
from __future__ import annotations

import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import interferometer as ifm
from . import materials, oracle
from .config import ScanConfig, parse_config
from .constants import HBAR, MJ, MM, MS, NM, NS, STANDARD_GRAVITY, UM
from .errors import DegenerateSignalError
from .grating import GratingPulse


@dataclass
class Table:
    config: ScanConfig
    columns: list
    rows: list

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def to_csv(self):
        buf = io.StringIO()
        for line in self.config.to_ini().splitlines():
            buf.write(f"# {line}".rstrip() + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, str):
        return v
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def config_from_csv(text) -> ScanConfig:
    """Rebuild the configuration echoed in a CSV header."""
    lines = [ln[2:] if ln.startswith("# ") else ln[1:] for ln in text.splitlines() if ln.startswith("#")]
    return parse_config("\n".join(lines))


def read_csv(text):
    """Parse a scan CSV into (config, column names, float array of rows)."""
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    columns = body[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]], dtype=float)
    return config_from_csv(text), columns, data.reshape(len(body) - 1, len(columns))


@dataclass(frozen=True)
class Setup:
    """Everything needed to evaluate one curve family at one axis value."""

    label: str
    species: materials.ParticleSpecies
    ensemble: ifm.EnsembleModel
    beta: float
    rayleigh_ratio: float
    sigma_abs: float
    talbot_time: float
    d: float


def _records(cfg):
    if cfg.materials_file:
        return materials.load_materials(cfg.materials_file)
    return None


def _laser_pulse(cfg, energy_mj):
    return materials.LaserPulse(
        wavelength=cfg.wavelength_nm * NM,
        energy=energy_mj * MJ,
        profile=cfg.profile,
        waist_y=cfg.waist_y_um * UM if cfg.waist_y_um else None,
        waist_z=cfg.waist_z_um * UM if cfg.waist_z_um else None,
        area=cfg.area_mm2 * MM * MM if cfg.area_mm2 else None,
    )


def setups(cfg: ScanConfig):
    records = _records(cfg)
    lam = cfg.wavelength_nm * NM
    d = lam / 2.0
    out = []
    for label, name, mass_amu, beta_override in cfg.variants:
        material = materials.find_material(name, records)
        materials.check_wavelength(material, lam)
        species = materials.ParticleSpecies.from_amu(material, mass_amu)
        beta = beta_override if beta_override is not None else materials.beta(material)
        ratio = materials.rayleigh_ratio(species, lam) if cfg.rayleigh and material.epsilon2 > 0 else 0.0
        sigma = materials.absorption_cross_section(species, lam)
        ensemble = ifm.EnsembleModel(species.mass, cfg.velocity_spread, cfg.cloud_extension_mm * MM)
        out.append(Setup(label, species, ensemble, beta, ratio, sigma, ifm.talbot_time(species.mass, d), d))
    return out


def n0_triple(cfg, setup, axis=None, value=None):
    """Absorbed-photon numbers of the three pulses, with an optional power-axis override."""
    if cfg.n0 is not None:
        n0 = list(cfg.n0)
    else:
        n0 = [materials.n0_from_pulse(_laser_pulse(cfg, e), setup.sigma_abs) for e in cfg.pulse_energy_mj]
    if axis is not None and axis.startswith("power"):
        k = int(axis[-1]) - 1
        if cfg.unit == "mJ":
            n0[k] = materials.n0_from_pulse(_laser_pulse(cfg, value), setup.sigma_abs)
        else:
            n0[k] = value
    return n0


def grating_pulses(cfg, setup, axis=None, value=None):
    return [GratingPulse.from_beta(n, setup.beta, setup.rayleigh_ratio) for n in n0_triple(cfg, setup, axis, value)]


def sequence(cfg, setup, axis=None, value=None):
    T = cfg.T_ms * MS if cfg.T_ms is not None else cfg.T_over_TT * setup.talbot_time
    tau = cfg.tau_ns * NS
    if axis == "delay":
        T = value * setup.talbot_time if cfg.unit == "T_TT" else value * MS
    elif axis == "tau":
        tau = value * NS
    return ifm.PulseSequence(T=T, N=cfg.N, tau=tau, acceleration=cfg.acceleration, d=setup.d)


def _suffix(cfg, model, mode, label):
    s = f"_{model}" if model else ""
    if len(cfg.third_modes) > 1:
        s += f"_{mode}"
    if label:
        s += f"_{label}"
    return s


def _axis_column(cfg, signal=False):
    if cfg.axis == "delay":
        return "T_over_TT" if cfg.unit == "T_TT" else "T_ms"
    if cfg.axis == "tau":
        return "tau_ns"
    if cfg.axis == "x_s":
        return "x_s_over_d" if cfg.unit == "d" else "x_s_nm"
    return "n0_axis" if cfg.unit == "n0" else "energy_mJ_axis"


def _run(cfg, columns, evaluate, workers):
    xs = cfg.axis_values()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                rows = list(pool.map(evaluate, xs))
        else:
            rows = [evaluate(x) for x in xs]
    return Table(cfg, columns, [(float(x),) + tuple(r) for x, r in zip(xs, rows)])


def _require(cfg, axes, what):
    if cfg.axis not in axes:
        from .errors import ConfigError

        raise ConfigError(f"{what} needs scan.axis in {{{', '.join(axes)}}}, got {cfg.axis!r}", key="scan.axis")


def _visibility_columns(cfg, fams):
    cols = []
    for s in fams:
        for mode in cfg.third_modes:
            for model in cfg.models:
                cols += [f"V_sin{_suffix(cfg, model, mode, s.label)}", f"V_full{_suffix(cfg, model, mode, s.label)}"]
            cols.append(f"S0{_suffix(cfg, None, mode, s.label)}")
    return cols


def _visibility_row(cfg, fams, value):
    row = []
    for s in fams:
        pulses = grating_pulses(cfg, s, cfg.axis, value)
        seq = sequence(cfg, s, cfg.axis, value)
        for mode in cfg.third_modes:
            s0 = math.nan
            for model in cfg.models:
                try:
                    r = ifm.fringe(seq, s.ensemble, pulses, third_mode=mode, model=model)
                    row += [r.V_sin, r.V]
                    s0 = r.S0
                except DegenerateSignalError:
                    row += [math.nan, math.nan]
            if math.isnan(s0):
                ell, comps = ifm.signal_components(seq, s.ensemble, pulses, mode, cfg.models[0])
                s0 = float(comps[ell == 0][0].real)
            row.append(s0)
    return row


def run_delay_scan(cfg: ScanConfig, workers=1) -> Table:
    """Visibilities and mean signal against the pulse delay T (or tau)."""
    _require(cfg, ("delay", "tau"), "scan-delay")
    fams = setups(cfg)
    cols = [_axis_column(cfg)] + _visibility_columns(cfg, fams)
    return _run(cfg, cols, lambda v: _visibility_row(cfg, fams, v), workers)


def run_power_scan(cfg: ScanConfig, workers=1) -> Table:
    """Visibilities and transmissivity against the power of one pulse."""
    _require(cfg, ("power1", "power2", "power3"), "scan-power")
    fams = setups(cfg)
    cols = [_axis_column(cfg)] + _visibility_columns(cfg, fams)
    return _run(cfg, cols, lambda v: _visibility_row(cfg, fams, v), workers)


def run_signal(cfg: ScanConfig, workers=1) -> Table:
    """Detection signal S against x_S, or against T or tau at fixed x_S."""
    _require(cfg, ("x_s", "delay", "tau"), "signal")
    fams = setups(cfg)
    cols = [_axis_column(cfg)]
    for s in fams:
        for mode in cfg.third_modes:
            cols += [f"S{_suffix(cfg, model, mode, s.label)}" for model in cfg.models]

    def evaluate(value):
        row = []
        for s in fams:
            pulses = grating_pulses(cfg, s)
            if cfg.axis == "x_s":
                seq = sequence(cfg, s)
                x = value * s.d if cfg.unit == "d" else value * NM
            else:
                seq = sequence(cfg, s, cfg.axis, value)
                x = cfg.x_s_over_d * s.d
            for mode in cfg.third_modes:
                for model in cfg.models:
                    row.append(ifm.signal(seq, s.ensemble, pulses, x, third_mode=mode, model=model))
        return row

    return _run(cfg, cols, evaluate, workers)


def run_material_report(cfg: ScanConfig) -> Table:
    """Derived optical and planning quantities, one ``quantity,value,unit`` row each."""
    rows = []
    lam = cfg.wavelength_nm * NM
    for s in setups(cfg):
        pre = f"{s.label}." if s.label else ""
        mat = s.species.material
        add = lambda q, v, u: rows.append((pre + q, v, u))
        add("period", s.d / NM, "nm")
        add("mass", s.species.mass_amu, "amu")
        add("radius", s.species.radius / NM, "nm")
        add("sigma_abs", s.sigma_abs, "m^2")
        add("polarizability", materials.polarizability(s.species), "m^3")
        add("beta", materials.beta(mat), "1")
        if mat.epsilon2 > 0:
            add("rayleigh_ratio", materials.rayleigh_ratio(s.species, lam), "1")
        # photons absorbed per unit pulse energy at the beam centre
        unit_fluence = materials.n0_from_pulse(materials.LaserPulse(lam, MJ, "flat_top", area=MM * MM), s.sigma_abs)
        add("n0_per_mJ_per_mm2", unit_fluence, "1/(mJ/mm^2)")
        if cfg.waist_y_um or cfg.area_mm2:
            add("n0_per_mJ", materials.n0_from_pulse(_laser_pulse(cfg, 1.0), s.sigma_abs), "1/mJ")
        seq = sequence(cfg, s)
        total = (cfg.N + 1) * seq.T + seq.tau
        add("talbot_time", s.talbot_time / MS, "ms")
        add("sequence_duration", total / MS, "ms")
        add("free_fall_drop", 0.5 * STANDARD_GRAVITY * total**2 / MM, "mm")
        add("coherence_width_over_d", HBAR / (s.species.mass * cfg.velocity_spread * s.d), "1")
        if mat.work_function is not None:
            add("ionization_energy", materials.ionization_energy(mat.work_function, s.species.radius), "eV")
        if cfg.velocity_m_s is not None:
            add("de_broglie_wavelength", materials.de_broglie(s.species.mass, cfg.velocity_m_s), "m")
    return Table(cfg, ["quantity", "value", "unit"], rows)


def run_verify(level="fast", seed=0):
    """Run the oracle comparison suite; returns (checks, report text)."""
    checks = oracle.verification_suite(level, seed)
    lines = [f"{'status':<9}{'check':<52}{'value':>26}{'oracle':>26}{'deviation':>12}{'tol':>9}"]
    for c in checks:
        status = "PASS" if c.passed else ("NOCONV" if not c.converged else "FAIL")
        lines.append(
            f"{status:<9}{c.name:<52}{_cfmt(c.value):>26}{_cfmt(c.reference):>26}{c.deviation:>12.2e}{c.tolerance:>9.0e}"
        )
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return checks, "\n".join(lines) + "\n"


def _cfmt(z):
    z = complex(z)
    if z.imag == 0 or abs(z.imag) < 1e-15 * max(abs(z.real), 1e-300):
        return f"{z.real:.12g}"
    return f"{z.real:.8g}{z.imag:+.8g}j"


__all__ = [
    "Table",
    "config_from_csv",
    "read_csv",
    "run_delay_scan",
    "run_material_report",
    "run_power_scan",
    "run_signal",
    "run_verify",
    "setups",
]
