"""Physical constants (CODATA 2018, SI) and unit conversion factors.

Every numerical anchor in the package depends on these values, so they live
in exactly one place.
"""
import math

PLANCK = 6.62607015e-34  # J s
HBAR = PLANCK / (2.0 * math.pi)
SPEED_OF_LIGHT = 299792458.0  # m/s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
STANDARD_GRAVITY = 9.81  # m/s^2, value used for planning numbers

# e^2 / (4 pi eps0) expressed in eV m (about 1.43996 eV nm)
COULOMB_EV_M = ELEMENTARY_CHARGE / (4.0 * math.pi * VACUUM_PERMITTIVITY)

AMU = ATOMIC_MASS_UNIT
NM = 1e-9
UM = 1e-6
MM = 1e-3
NS = 1e-9
US = 1e-6
MS = 1e-3
MJ = 1e-3
UJ = 1e-6
EV = ELEMENTARY_CHARGE
