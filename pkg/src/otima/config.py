"""Scan configuration: INI files with sections, parsed into a frozen ScanConfig.

Grammar (``#`` or ``;`` start comments, lists are comma separated)::

    [scenario]
    name = fig2a

    [particle]
    material = gold                # one name or a list
    mass_amu = 1e6                 # one value or a list, broadcast with material
    beta = 1.0                     # optional override of the material value
    materials_file = my.txt        # optional, defaults to the bundled table
    velocity_m_s = 40              # optional forward velocity, for the material report

    [laser]
    wavelength_nm = 157.63
    n0 = 8, 8, 8                   # absorbed photons per pulse, or instead:
    pulse_energy_mj = 1.0, 2.0, 1.0
    profile = gaussian             # gaussian (waist_y_um, waist_z_um) | flat_top (area_mm2)
    rayleigh = on                  # include Rayleigh scattering in the decohered model

    [sequence]
    N = 1
    T_over_TT = 1.0                # or T_ms
    tau_ns = 0
    acceleration = 0               # m/s^2 along the grating vector

    [ensemble]
    velocity_spread = 1.0          # m/s
    cloud_extension_mm = 1.0

    [model]
    models = quantum, classical    # quantum | classical | decohered
    third_mode = neutral           # neutral | inverse, or both

    [scan]
    axis = delay                   # delay | tau | power1 | power2 | power3 | x_s
    start = 0.1
    stop = 3
    points = 300
    unit = T_TT                    # delay: T_TT | ms; tau: ns; power: n0 | mJ; x_s: d | nm

    [output]
    path = fig2a.csv
    seed = 0

Every key has a default except the material and the n0 (or pulse energy)
triple. ``to_ini`` writes the fully resolved configuration, which is what
the CSV header echoes; ``parse_config`` of that text gives back an equal
ScanConfig.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

AXES = {
    "delay": ("T_TT", "ms"),
    "tau": ("ns",),
    "power1": ("n0", "mJ"),
    "power2": ("n0", "mJ"),
    "power3": ("n0", "mJ"),
    "x_s": ("d", "nm"),
}
DEFAULT_POINTS = {"delay": 300, "tau": 300, "power1": 200, "power2": 200, "power3": 200, "x_s": 300}
MODELS = ("quantum", "classical", "decohered")
THIRD_MODES = ("neutral", "inverse")
PROFILES = ("gaussian", "flat_top")

_SCHEMA = {
    "scenario": ("name",),
    "particle": ("material", "mass_amu", "beta", "materials_file", "velocity_m_s"),
    "laser": ("wavelength_nm", "n0", "pulse_energy_mj", "profile", "waist_y_um", "waist_z_um", "area_mm2", "rayleigh"),
    "sequence": ("n", "t_over_tt", "t_ms", "tau_ns", "acceleration"),
    "ensemble": ("velocity_spread", "cloud_extension_mm"),
    "model": ("models", "third_mode"),
    "scan": ("axis", "start", "stop", "points", "unit", "x_s_over_d"),
    "output": ("path", "seed", "mc_samples"),
}


@dataclass(frozen=True)
class ScanConfig:
    name: str
    materials: tuple
    masses_amu: tuple
    n0: tuple | None = None
    pulse_energy_mj: tuple | None = None
    beta: tuple | None = None
    materials_file: str | None = None
    velocity_m_s: float | None = None
    wavelength_nm: float = 157.63
    profile: str = "gaussian"
    waist_y_um: float | None = None
    waist_z_um: float | None = None
    area_mm2: float | None = None
    rayleigh: bool = True
    N: int = 1
    T_over_TT: float | None = 1.0
    T_ms: float | None = None
    tau_ns: float = 0.0
    acceleration: float = 0.0
    velocity_spread: float = 1.0
    cloud_extension_mm: float = 1.0
    models: tuple = ("quantum",)
    third_modes: tuple = ("neutral",)
    axis: str | None = None
    start: float | None = None
    stop: float | None = None
    points: int | None = None
    unit: str | None = None
    x_s_over_d: float = 0.0
    out: str | None = None
    seed: int = 0
    mc_samples: int = 100000

    @property
    def variants(self):
        """(label, material, mass_amu, beta_override) for each curve family."""
        count = max(len(self.materials), len(self.masses_amu), len(self.beta or ()))
        label_material = len(self.materials) > 1
        label_mass = len(self.masses_amu) > 1
        out = []
        for i in range(count):
            mat = self.materials[i if len(self.materials) > 1 else 0]
            mass = self.masses_amu[i if len(self.masses_amu) > 1 else 0]
            beta = None
            if self.beta:
                beta = self.beta[i if len(self.beta) > 1 else 0]
            parts = []
            if label_material:
                parts.append(mat)
            if label_mass:
                parts.append(f"m{mass:g}".replace("+", ""))
            if not parts and len(self.beta or ()) > 1:
                parts.append(f"beta{beta:g}")
            out.append(("_".join(parts), mat, mass, beta))
        return out

    def axis_values(self):
        import numpy as np

        return np.linspace(self.start, self.stop, self.points)

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)

    def to_ini(self) -> str:
        """Fully resolved configuration as INI text."""

        def fmt(v):
            if isinstance(v, bool):
                return "on" if v else "off"
            if isinstance(v, float):
                return repr(v)
            if isinstance(v, tuple):
                return ", ".join(fmt(x) for x in v)
            return str(v)

        sections = {
            "scenario": [("name", self.name)],
            "particle": [
                ("material", self.materials),
                ("mass_amu", self.masses_amu),
                ("beta", self.beta),
                ("materials_file", self.materials_file),
                ("velocity_m_s", self.velocity_m_s),
            ],
            "laser": [
                ("wavelength_nm", self.wavelength_nm),
                ("n0", self.n0),
                ("pulse_energy_mj", self.pulse_energy_mj),
                ("profile", self.profile),
                ("waist_y_um", self.waist_y_um),
                ("waist_z_um", self.waist_z_um),
                ("area_mm2", self.area_mm2),
                ("rayleigh", self.rayleigh),
            ],
            "sequence": [
                ("N", self.N),
                ("T_over_TT", self.T_over_TT),
                ("T_ms", self.T_ms),
                ("tau_ns", self.tau_ns),
                ("acceleration", self.acceleration),
            ],
            "ensemble": [("velocity_spread", self.velocity_spread), ("cloud_extension_mm", self.cloud_extension_mm)],
            "model": [("models", self.models), ("third_mode", self.third_modes)],
            "scan": [
                ("axis", self.axis),
                ("start", self.start),
                ("stop", self.stop),
                ("points", self.points),
                ("unit", self.unit),
                ("x_s_over_d", self.x_s_over_d),
            ],
            "output": [("path", self.out), ("seed", self.seed), ("mc_samples", self.mc_samples)],
        }
        lines = []
        for section, items in sections.items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {fmt(v)}" for k, v in items if v is not None)
            lines.append("")
        return "\n".join(lines)


def _locate(text, section, key):
    current = None
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"^\[(.+)\]$", line)
        if m:
            current = m.group(1).strip().lower()
        elif current == section and re.match(rf"^{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return number
    return None


class _Reader:
    def __init__(self, parser, text, path):
        self.parser = parser
        self.text = text
        self.path = path

    def error(self, section, key, message):
        line = _locate(self.text, section, key) if key else None
        name = f"{section}.{key}" if key else section
        return ConfigError(message, key=name, line=line, path=self.path)

    def raw(self, section, key):
        if not self.parser.has_section(section):
            return None
        value = self.parser.get(section, key, fallback=None)
        if value is None or value.strip() == "":
            return None
        return value.strip()

    def number(self, section, key, default=None, positive=False, nonneg=False):
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            x = float(value)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {value!r}") from None
        if not math.isfinite(x):
            raise self.error(section, key, "value must be finite")
        if positive and not x > 0:
            raise self.error(section, key, "value must be > 0")
        if nonneg and not x >= 0:
            raise self.error(section, key, "value must be >= 0")
        return x

    def integer(self, section, key, default=None, minimum=None):
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            x = int(value)
        except ValueError:
            raise self.error(section, key, f"expected an integer, got {value!r}") from None
        if minimum is not None and x < minimum:
            raise self.error(section, key, f"value must be >= {minimum}")
        return x

    def words(self, section, key, allowed=None, default=None):
        value = self.raw(section, key)
        if value is None:
            return default
        items = tuple(w.strip() for w in value.split(",") if w.strip())
        if not items:
            raise self.error(section, key, "empty list")
        if allowed is not None:
            items = tuple(w.lower() for w in items)
            for w in items:
                if w not in allowed:
                    raise self.error(section, key, f"{w!r} is not one of {', '.join(allowed)}")
        return items

    def numbers(self, section, key, default=None, nonneg=False, positive=False):
        items = self.words(section, key)
        if items is None:
            return default
        out = []
        for w in items:
            try:
                x = float(w)
            except ValueError:
                raise self.error(section, key, f"expected numbers, got {w!r}") from None
            if not math.isfinite(x) or (nonneg and x < 0) or (positive and x <= 0):
                cond = "> 0" if positive else ">= 0" if nonneg else "finite"
                raise self.error(section, key, f"every value must be {cond}")
            out.append(x)
        return tuple(out)

    def flag(self, section, key, default):
        value = self.raw(section, key)
        if value is None:
            return default
        v = value.lower()
        if v in ("on", "true", "yes", "1"):
            return True
        if v in ("off", "false", "no", "0"):
            return False
        raise self.error(section, key, f"expected on/off, got {value!r}")


def parse_config(text, path=None) -> ScanConfig:
    """Parse and validate INI text; raises ConfigError naming the offending key."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=str(path or "<string>"))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed INI: {exc}", line=line, path=path) from None
    r = _Reader(parser, text, path)

    for section in parser.sections():
        if section not in _SCHEMA:
            line = next((i for i, raw in enumerate(text.splitlines(), 1) if raw.strip() == f"[{section}]"), None)
            raise ConfigError(f"unknown section [{section}]", line=line, path=path)
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise r.error(section, key, "unknown key")

    name = r.raw("scenario", "name") or (Path(path).stem if path else "scenario")
    materials = r.words("particle", "material")
    if materials is None:
        raise r.error("particle", "material", "missing required key")
    masses = r.numbers("particle", "mass_amu", positive=True)
    if masses is None:
        raise r.error("particle", "mass_amu", "missing required key")
    beta = r.numbers("particle", "beta")
    if beta is not None and any(b == 0 for b in beta):
        raise r.error("particle", "beta", "beta must be nonzero")
    lengths = {len(materials), len(masses)} | ({len(beta)} if beta else set())
    if len(lengths - {1}) > 1:
        raise r.error("particle", "mass_amu", "material, mass_amu and beta lists must have equal length or length 1")

    n0 = r.numbers("laser", "n0", nonneg=True)
    energies = r.numbers("laser", "pulse_energy_mj", nonneg=True)
    if (n0 is None) == (energies is None):
        raise r.error("laser", "n0", "give exactly one of n0 and pulse_energy_mj")
    for key, triple in (("n0", n0), ("pulse_energy_mj", energies)):
        if triple is not None and len(triple) != 3:
            raise r.error("laser", key, "expected three values, one per pulse")
    profile = (r.raw("laser", "profile") or "gaussian").lower()
    if profile not in PROFILES:
        raise r.error("laser", "profile", f"expected one of {', '.join(PROFILES)}")
    waist_y = r.number("laser", "waist_y_um", positive=True)
    waist_z = r.number("laser", "waist_z_um", positive=True)
    area = r.number("laser", "area_mm2", positive=True)
    if energies is not None:
        if profile == "gaussian" and (waist_y is None or waist_z is None):
            raise r.error("laser", "waist_y_um", "gaussian profile needs waist_y_um and waist_z_um")
        if profile == "flat_top" and area is None:
            raise r.error("laser", "area_mm2", "flat_top profile needs area_mm2")

    t_over = r.number("sequence", "t_over_tt", positive=True)
    t_ms = r.number("sequence", "t_ms", positive=True)
    if t_over is not None and t_ms is not None:
        raise r.error("sequence", "T_ms", "give only one of T_over_TT and T_ms")
    if t_over is None and t_ms is None:
        t_over = 1.0

    models = r.words("model", "models", MODELS, ("quantum",))
    modes = r.words("model", "third_mode", THIRD_MODES, ("neutral",))

    axis = r.raw("scan", "axis")
    unit = r.raw("scan", "unit")
    start = r.number("scan", "start")
    stop = r.number("scan", "stop")
    points = r.integer("scan", "points", minimum=2)
    if axis is not None:
        axis = axis.lower()
        if axis not in AXES:
            raise r.error("scan", "axis", f"expected one of {', '.join(AXES)}")
        unit = unit or AXES[axis][0]
        if unit not in AXES[axis]:
            raise r.error("scan", "unit", f"axis {axis} accepts units {', '.join(AXES[axis])}")
        if start is None or stop is None:
            raise r.error("scan", "start" if start is None else "stop", "scan range needs start and stop")
        if not stop > start:
            raise r.error("scan", "stop", "stop must be larger than start")
        points = points or DEFAULT_POINTS[axis]
        if axis.startswith("power"):
            if start < 0:
                raise r.error("scan", "start", "pulse power must be >= 0")
            if unit == "mJ" and energies is None:
                raise r.error("scan", "unit", "unit mJ needs pulse_energy_mj in [laser]")
        if axis == "delay" and start <= 0:
            raise r.error("scan", "start", "delay must be > 0")

    cfg = ScanConfig(
        name=name,
        materials=materials,
        masses_amu=masses,
        n0=n0,
        pulse_energy_mj=energies,
        beta=beta,
        materials_file=r.raw("particle", "materials_file"),
        velocity_m_s=r.number("particle", "velocity_m_s", positive=True),
        wavelength_nm=r.number("laser", "wavelength_nm", 157.63, positive=True),
        profile=profile,
        waist_y_um=waist_y,
        waist_z_um=waist_z,
        area_mm2=area,
        rayleigh=r.flag("laser", "rayleigh", True),
        N=r.integer("sequence", "n", 1, minimum=1),
        T_over_TT=t_over,
        T_ms=t_ms,
        tau_ns=r.number("sequence", "tau_ns", 0.0),
        acceleration=r.number("sequence", "acceleration", 0.0),
        velocity_spread=r.number("ensemble", "velocity_spread", 1.0, positive=True),
        cloud_extension_mm=r.number("ensemble", "cloud_extension_mm", 1.0, positive=True),
        models=models,
        third_modes=modes,
        axis=axis,
        start=start,
        stop=stop,
        points=points,
        unit=unit,
        x_s_over_d=r.number("scan", "x_s_over_d", 0.0),
        out=r.raw("output", "path"),
        seed=r.integer("output", "seed", 0, minimum=0),
        mc_samples=r.integer("output", "mc_samples", 100000, minimum=100000),
    )
    return _resolve_materials(cfg, r)


def _resolve_materials(cfg, reader):
    from . import materials

    records = None
    if cfg.materials_file:
        file = Path(cfg.materials_file)
        if not file.is_absolute() and reader.path is not None:
            file = Path(reader.path).parent / file
        records = materials.load_materials(file)
        cfg = cfg.replace(materials_file=str(file))
    for name in cfg.materials:
        try:
            materials.find_material(name, records)
        except ConfigError:
            raise reader.error("particle", "material", f"unknown material {name!r}") from None
    return cfg


def load_config(path) -> ScanConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=path) from None
    return parse_config(text, path)


def config_fields():
    return [f.name for f in fields(ScanConfig)]
