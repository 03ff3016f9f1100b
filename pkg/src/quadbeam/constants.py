"""Physical constants (CODATA, via :mod:`scipy.constants`)."""
from scipy import constants as _c

hbar = _c.hbar                      # J s
epsilon_0 = _c.epsilon_0            # F/m
c = _c.c                            # m/s
e = _c.e                            # C
a0 = _c.physical_constants["Bohr radius"][0]   # m

#: Mass of a caesium-133 atom [kg], as used by the Cs preset.
CS_MASS = 2.2069e-25
