"""Quantum rotor chains: DMRG ground states, observables, and criticality fits."""

__version__ = "0.1.0"

from .sites import RotorParams, SiteBasis, build_basis, build_linear_rotor_basis, build_water_basis
from .model import ChainSpec, build_mpo, dipole_dipole_coupling, tfim_chain, tfim_mpo

__all__ = [
    "RotorParams",
    "SiteBasis",
    "build_basis",
    "build_linear_rotor_basis",
    "build_water_basis",
    "ChainSpec",
    "build_mpo",
    "dipole_dipole_coupling",
    "tfim_chain",
    "tfim_mpo",
]
