"""Particle optics: cross sections, polarizability and material records.

All quantities are SI internally. The dielectric function is a single complex
number eps = eps1 + i eps2 taken at the grating laser wavelength; particles are
treated as point-like spheres (radius much smaller than the wavelength).
"""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .constants import AMU, COULOMB_EV_M, NM, PLANCK, SPEED_OF_LIGHT
from .errors import ConfigError, SingularityError

# |eps + 2| below this is treated as sitting on the plasmon pole
_POLE_TOL = 1e-9


@dataclass(frozen=True)
class MaterialRecord:
    name: str
    mass_density: float  # kg/m^3
    epsilon1: float
    epsilon2: float
    work_function: float | None = None  # eV
    wavelength: float | None = None  # m, wavelength the eps pair refers to

    def __post_init__(self):
        if not self.mass_density > 0:
            raise ValueError(f"{self.name}: mass density must be > 0")
        if not self.epsilon2 >= 0:
            raise ValueError(f"{self.name}: eps2 must be >= 0")
        if abs(complex(self.epsilon1 + 2.0, self.epsilon2)) < _POLE_TOL:
            raise SingularityError(f"{self.name}: eps = -2 (plasmon pole)")
        if self.work_function is not None and not self.work_function > 0:
            raise ValueError(f"{self.name}: work function must be > 0")

    @property
    def epsilon(self) -> complex:
        return complex(self.epsilon1, self.epsilon2)


@dataclass(frozen=True)
class ParticleSpecies:
    material: MaterialRecord
    mass: float  # kg

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("particle mass must be > 0")

    @classmethod
    def from_amu(cls, material, mass_amu):
        return cls(material, mass_amu * AMU)

    @property
    def mass_amu(self) -> float:
        return self.mass / AMU

    @property
    def radius(self) -> float:
        """Radius of a homogeneous sphere, (3 m / 4 pi rho)^(1/3)."""
        return (3.0 * self.mass / (4.0 * math.pi * self.material.mass_density)) ** (1.0 / 3.0)


@dataclass(frozen=True)
class LaserPulse:
    """One grating pulse as delivered by the laser.

    ``profile`` is ``"gaussian"`` (waists ``waist_y``, ``waist_z``, 1/e^2 radii
    of the intensity) or ``"flat_top"`` (illuminated ``area``).
    """

    wavelength: float
    energy: float
    profile: str = "gaussian"
    waist_y: float | None = None
    waist_z: float | None = None
    area: float | None = None

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be > 0")
        if not self.energy >= 0:
            raise ValueError("pulse energy must be >= 0")
        if self.profile == "gaussian":
            if not (self.waist_y and self.waist_z and self.waist_y > 0 and self.waist_z > 0):
                raise ValueError("gaussian profile needs positive waist_y and waist_z")
        elif self.profile == "flat_top":
            if not (self.area and self.area > 0):
                raise ValueError("flat_top profile needs a positive area")
        else:
            raise ValueError(f"unknown beam profile {self.profile!r}")

    @property
    def period(self) -> float:
        """Grating period of the retro-reflected standing wave."""
        return self.wavelength / 2.0

    @property
    def peak_profile(self) -> float:
        """Normalised transverse mode profile at the beam centre, f(0, 0) in 1/m^2."""
        if self.profile == "gaussian":
            return 2.0 / (math.pi * self.waist_y * self.waist_z)
        return 1.0 / self.area


def _lorentz_factor(material):
    # (eps - 1)/(eps + 2), the Clausius-Mossotti factor
    eps = material.epsilon
    if abs(eps + 2.0) < _POLE_TOL:
        raise SingularityError(f"{material.name}: eps = -2 (plasmon pole)")
    return (eps - 1.0) / (eps + 2.0)


def absorption_cross_section(species: ParticleSpecies, wavelength: float) -> float:
    """Absorption cross section of a sub-wavelength sphere, in m^2.

    sigma_abs = 18 pi m eps2 / (rho lambda ((eps1 + 2)^2 + eps2^2))
    """
    mat = species.material
    denom = (mat.epsilon1 + 2.0) ** 2 + mat.epsilon2**2
    if denom < _POLE_TOL**2:
        raise SingularityError(f"{mat.name}: eps = -2 (plasmon pole)")
    return 18.0 * math.pi * species.mass * mat.epsilon2 / (mat.mass_density * wavelength * denom)


def absorption_cross_section_radius_form(species, wavelength):
    """Same quantity from 4 pi R^3 (2 pi / lambda) Im[(eps - 1)/(eps + 2)]."""
    r = species.radius
    return 4.0 * math.pi * r**3 * (2.0 * math.pi / wavelength) * _lorentz_factor(species.material).imag


def polarizability(species: ParticleSpecies) -> float:
    """Optical polarizability in volume units (alpha_SI / 4 pi eps0), in m^3.

    Negative for low-field seekers.
    """
    mat = species.material
    e1, e2 = mat.epsilon1, mat.epsilon2
    denom = (e1 + 2.0) ** 2 + e2**2
    if denom < _POLE_TOL**2:
        raise SingularityError(f"{mat.name}: eps = -2 (plasmon pole)")
    volume = 3.0 * species.mass / (4.0 * math.pi * mat.mass_density)
    return volume * (e1 * e1 + e2 * e2 + e1 - 2.0) / denom


def polarizability_radius_form(species):
    """R^3 Re[(eps - 1)/(eps + 2)]."""
    return species.radius**3 * _lorentz_factor(species.material).real


def beta(material: MaterialRecord) -> float:
    """Ratio of absorption to phase action, 3 eps2 / (eps1^2 + eps2^2 + eps1 - 2).

    Equals n0 / (2 phi0) for every pulse; its sign is that of the polarizability.
    """
    e1, e2 = material.epsilon1, material.epsilon2
    denom = e1 * e1 + e2 * e2 + e1 - 2.0
    if denom == 0.0:
        raise SingularityError(f"{material.name}: vanishing polarizability, beta undefined")
    return 3.0 * e2 / denom


def rayleigh_ratio(species: ParticleSpecies, wavelength: float) -> float:
    """sigma_R / sigma_abs = (4 pi^2 / 3) ((eps1 - 1)^2 + eps2^2) / eps2 * m / (rho lambda^3)."""
    mat = species.material
    if mat.epsilon2 == 0.0:
        raise SingularityError(f"{mat.name}: eps2 = 0, no absorption to compare against")
    strength = ((mat.epsilon1 - 1.0) ** 2 + mat.epsilon2**2) / mat.epsilon2
    return 4.0 * math.pi**2 / 3.0 * strength * species.mass / (mat.mass_density * wavelength**3)


def rayleigh_ratio_radius_form(species, wavelength):
    """(2/9) ((eps1 - 1)^2 + eps2^2) / eps2 * (k_L R)^3."""
    mat = species.material
    if mat.epsilon2 == 0.0:
        raise SingularityError(f"{mat.name}: eps2 = 0, no absorption to compare against")
    strength = ((mat.epsilon1 - 1.0) ** 2 + mat.epsilon2**2) / mat.epsilon2
    kr = 2.0 * math.pi / wavelength * species.radius
    return 2.0 / 9.0 * strength * kr**3


def n0_from_pulse(pulse: LaserPulse, sigma_abs: float) -> float:
    """Mean number of absorbed photons at an antinode, 4 sigma E lambda f(0,0) / (h c)."""
    return 4.0 * sigma_abs * pulse.energy * pulse.wavelength * pulse.peak_profile / (PLANCK * SPEED_OF_LIGHT)


def pulse_energy_for_n0(n0, sigma_abs, wavelength, peak_profile):
    """Pulse energy (J) that produces ``n0`` absorbed photons at an antinode."""
    return n0 * PLANCK * SPEED_OF_LIGHT / (4.0 * sigma_abs * wavelength * peak_profile)


def ionization_energy(work_function_ev: float, radius: float) -> float:
    """Cluster ionization energy W + 0.42 e^2 / (4 pi eps0 R), in eV."""
    if not work_function_ev > 0 or not radius > 0:
        raise ValueError("work function and radius must be > 0")
    return work_function_ev + 0.42 * COULOMB_EV_M / radius


def de_broglie(mass: float, velocity: float) -> float:
    """de Broglie wavelength h / (m v) in m."""
    if not mass > 0 or not velocity > 0:
        raise ValueError("mass and velocity must be > 0")
    return PLANCK / (mass * velocity)


# ---------------------------------------------------------------------------
# material database files
#
# One record per line, whitespace separated key=value tokens:
#
#   name=gold density_kg_m3=19320 eps1=0.88 eps2=3.11 work_function_ev=5.4
#
# Required keys: name, density_kg_m3, eps1, eps2. Optional: work_function_ev,
# wavelength_nm. Text after '#' is a comment; blank lines are ignored. Names
# are case-insensitive and must be unique, so one file carries exactly one
# (eps1, eps2) pair per material.

_REQUIRED = ("name", "density_kg_m3", "eps1", "eps2")
_OPTIONAL = ("work_function_ev", "wavelength_nm")
_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)=(\S+)$")


def parse_materials(text, source="<string>"):
    records = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for token in line.split():
            m = _TOKEN.match(token)
            if m is None:
                raise ConfigError(f"malformed token {token!r}, expected key=value", line=lineno, path=source)
            key, value = m.groups()
            if key not in _REQUIRED and key not in _OPTIONAL:
                raise ConfigError("unknown key", key=key, line=lineno, path=source)
            if key in fields:
                raise ConfigError("key given twice", key=key, line=lineno, path=source)
            fields[key] = value
        for key in _REQUIRED:
            if key not in fields:
                raise ConfigError("missing required key", key=key, line=lineno, path=source)
        numbers = {}
        for key in fields:
            if key == "name":
                continue
            try:
                numbers[key] = float(fields[key])
            except ValueError:
                raise ConfigError(f"not a number: {fields[key]!r}", key=key, line=lineno, path=source) from None
            if not math.isfinite(numbers[key]):
                raise ConfigError("value must be finite", key=key, line=lineno, path=source)
        name = fields["name"]
        if name.lower() in seen:
            raise ConfigError(
                f"duplicate material {name!r} (first defined on line {seen[name.lower()]})",
                key="name", line=lineno, path=source,
            )
        wl = numbers.get("wavelength_nm")
        try:
            record = MaterialRecord(
                name=name,
                mass_density=numbers["density_kg_m3"],
                epsilon1=numbers["eps1"],
                epsilon2=numbers["eps2"],
                work_function=numbers.get("work_function_ev"),
                wavelength=None if wl is None else wl * NM,
            )
        except (ValueError, SingularityError) as exc:
            raise ConfigError(f"invariant violated: {exc}", line=lineno, path=source) from None
        seen[name.lower()] = lineno
        records.append(record)
    return records


def load_materials(path) -> list[MaterialRecord]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read material file: {exc}", path=path) from None
    return parse_materials(text, source=path)


def bundled_materials() -> list[MaterialRecord]:
    """Reference records for gold, silver and cesium at 157.63 nm."""
    text = resources.files("otima").joinpath("data/materials.txt").read_text()
    return parse_materials(text, source="otima/data/materials.txt")


def find_material(name, records=None) -> MaterialRecord:
    records = bundled_materials() if records is None else records
    for rec in records:
        if rec.name.lower() == name.lower():
            return rec
    raise ConfigError(f"unknown material {name!r}")


def check_wavelength(material, wavelength, tolerance=1 * NM):
    if material.wavelength is not None and abs(material.wavelength - wavelength) > tolerance:
        warnings.warn(
            f"{material.name}: dielectric data refer to {material.wavelength / NM:.2f} nm "
            f"but the laser runs at {wavelength / NM:.2f} nm",
            stacklevel=2,
        )
