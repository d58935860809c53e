"""Unit conversions and default molecular constants.

Everything internal is in Hartree atomic units: energies in hartree,
dipoles in e*bohr, distances in bohr. Config files use spectroscopic
units (cm^-1, Debye) and are converted on load.
"""

# CODATA 2018
HARTREE_IN_CM1 = 219474.6313632
CM1_TO_HARTREE = 1.0 / HARTREE_IN_CM1

# 1 e*bohr = 2.5417464519 D
EBOHR_IN_DEBYE = 2.5417464519
DEBYE_TO_EBOHR = 1.0 / EBOHR_IN_DEBYE

BOHR_IN_ANGSTROM = 0.529177210903

# Rigid-rotor constants of the water monomer (ground vibrational state)
# and its permanent dipole moment, in spectroscopic units.
WATER_A_CM1 = 27.877
WATER_B_CM1 = 14.512
WATER_C_CM1 = 9.285
WATER_MU_DEBYE = 1.855


def cm1_to_hartree(x: float) -> float:
    return x * CM1_TO_HARTREE


def hartree_to_cm1(x: float) -> float:
    return x * HARTREE_IN_CM1


def debye_to_ebohr(x: float) -> float:
    return x * DEBYE_TO_EBOHR
