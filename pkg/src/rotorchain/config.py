"""Sweep configuration: YAML parsing, validation, unit conversion, hashing.

Config files carry physical quantities in spectroscopic units with the
unit spelled out in the key name (``*_cm1``, ``*_debye``, ``*_bohr``,
``*_hartree``); everything is converted to atomic units on load.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import sqrt

import numpy as np
import yaml

from .dmrg import DmrgConfig
from .model import ChainSpec, spin_half_basis
from .sites import RotorParams, SiteBasis, build_basis
from .units import cm1_to_hartree, debye_to_ebohr
from .units import WATER_A_CM1, WATER_B_CM1, WATER_C_CM1, WATER_MU_DEBYE

MODES = ("full-symmetry", "broken-z", "broken-xy", "ssd-critical", "bond-weaken")


class ConfigError(ValueError):
    """Malformed or inconsistent sweep configuration."""


def config_hash(raw: dict) -> str:
    """Stable short hash of the parsed config mapping."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass
class AnalysisConfig:
    eta_window: tuple[int, int] | None = None
    exclude_edge_bonds: int = 1
    bootstrap_samples: int = 40
    class_beta_over_nu: float = 0.125
    collapse_quantity: str = "schmidt-gap"  # or "polarization"
    collapse_init: tuple | None = None


@dataclass
class SweepConfig:
    raw: dict
    hash: str
    model: str  # "water" | "linear" | "tfim"
    basis: SiteBasis
    sizes: list[int]
    sweep_values: list[float]  # R in bohr, or g for the Ising chain
    interaction_range: int
    mode: str
    edge_field: float
    bond_weaken_eps: list[float]
    tfim_j: float
    engine: str
    dmrg: DmrgConfig
    excited_states: int
    analysis: AnalysisConfig
    output: str
    workers: int
    seed: int
    notes: str = ""

    def points(self) -> list[tuple[int, float, float]]:
        """Grid as (N, sweep value, bond weakening) triples."""
        eps_list = self.bond_weaken_eps if self.mode == "bond-weaken" else [1.0]
        return [(n, r, eps) for n in self.sizes for r in self.sweep_values
                for eps in eps_list]

    def mode_label(self, eps: float = 1.0) -> str:
        if self.mode == "bond-weaken":
            return f"bond-weaken:{eps:g}"
        return self.mode

    def chain_spec(self, n: int, value: float, eps: float = 1.0) -> ChainSpec:
        e = self.edge_field
        field_vec = (0.0, 0.0, 0.0)
        if self.mode == "broken-z":
            field_vec = (0.0, 0.0, e)
        elif self.mode == "broken-xy":
            field_vec = (e / sqrt(2.0), e / sqrt(2.0), 0.0)
        kwargs = dict(
            n_sites=n,
            spacing=value,
            basis=self.basis,
            interaction_range=self.interaction_range,
            edge_field=field_vec,
            ssd=self.mode == "ssd-critical",
            bond_weaken=eps if self.mode == "bond-weaken" else 1.0,
        )
        if self.model == "tfim":
            kwargs["model"] = "tfim"
            kwargs["tfim_j"] = self.tfim_j
        try:
            return ChainSpec(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _get(raw: dict, key: str, default=None, required: bool = False):
    if key in raw:
        return raw[key]
    if required:
        raise ConfigError(f"missing required config key {key!r}")
    return default


def _build_site_basis(model: str, raw_basis: dict) -> SiteBasis:
    j_max = int(_get(raw_basis, "j_max", 1))
    try:
        if model == "water":
            params = RotorParams.asymmetric_top(
                a=cm1_to_hartree(float(_get(raw_basis, "a_cm1", WATER_A_CM1))),
                b=cm1_to_hartree(float(_get(raw_basis, "b_cm1", WATER_B_CM1))),
                c=cm1_to_hartree(float(_get(raw_basis, "c_cm1", WATER_C_CM1))),
                mu=debye_to_ebohr(float(_get(raw_basis, "dipole_debye", WATER_MU_DEBYE))),
                j_max=j_max,
            )
        elif model == "linear":
            params = RotorParams.linear(
                b=cm1_to_hartree(float(_get(raw_basis, "b_cm1", required=True))),
                mu=debye_to_ebohr(float(_get(raw_basis, "dipole_debye", required=True))),
                j_max=j_max,
            )
        else:
            raise ConfigError(f"unknown model {model!r}")
        return build_basis(params)
    except ValueError as exc:
        raise ConfigError(f"invalid basis parameters: {exc}") from exc


def parse_config(raw: dict) -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    model = _get(raw, "model", required=True)
    if model not in ("water", "linear", "tfim"):
        raise ConfigError(f"unknown model {model!r}")

    grid = _get(raw, "grid", required=True)
    sizes = [int(n) for n in _get(grid, "sizes", required=True)]
    if not sizes or any(n < 2 for n in sizes):
        raise ConfigError("grid.sizes must list chain lengths >= 2")
    if model == "tfim":
        values = [float(g) for g in _get(grid, "transverse_fields", required=True)]
        basis = spin_half_basis()
    else:
        values = [float(r) for r in _get(grid, "spacings_bohr", required=True)]
        basis = _build_site_basis(model, _get(raw, "basis", {}))
    if not values:
        raise ConfigError("sweep grid is empty")
    if len(set(values)) != len(values):
        raise ConfigError("sweep grid has duplicate values")

    mode = _get(raw, "mode", "full-symmetry")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r} (choose from {MODES})")
    eps_list = [float(x) for x in _get(raw, "bond_weaken_eps", [1e-3])]
    if mode == "bond-weaken" and not eps_list:
        raise ConfigError("bond-weaken mode needs a non-empty bond_weaken_eps list")

    dmrg_raw = _get(raw, "dmrg", {})
    try:
        dmrg = DmrgConfig(
            chi_max=int(_get(dmrg_raw, "chi_max", 64)),
            cutoff=float(_get(dmrg_raw, "cutoff", 1e-10)),
            max_sweeps=int(_get(dmrg_raw, "max_sweeps", 24)),
            tol_energy=float(_get(dmrg_raw, "tol_energy_hartree", 1e-10)),
            noise_amplitude=float(_get(dmrg_raw, "noise_amplitude", 0.0)),
            init=_get(dmrg_raw, "init", "local-ground"),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid dmrg section: {exc}") from exc

    ana_raw = _get(raw, "analysis", {})
    window = _get(ana_raw, "eta_window")
    init = _get(ana_raw, "collapse_init")
    analysis = AnalysisConfig(
        eta_window=tuple(int(x) for x in window) if window else None,
        exclude_edge_bonds=int(_get(ana_raw, "exclude_edge_bonds", 1)),
        bootstrap_samples=int(_get(ana_raw, "bootstrap_samples", 40)),
        class_beta_over_nu=float(_get(ana_raw, "class_beta_over_nu", 0.125)),
        collapse_quantity=_get(ana_raw, "collapse_quantity", "schmidt-gap"),
        collapse_init=tuple(float(x) for x in init) if init else None,
    )
    if analysis.collapse_quantity not in ("schmidt-gap", "polarization"):
        raise ConfigError("analysis.collapse_quantity must be schmidt-gap or polarization")

    engine = _get(raw, "engine", "dmrg")
    if engine not in ("dmrg", "ed"):
        raise ConfigError("engine must be 'dmrg' or 'ed'")

    cfg = SweepConfig(
        raw=raw,
        hash=config_hash(raw),
        model=model,
        basis=basis,
        sizes=sizes,
        sweep_values=values,
        interaction_range=int(_get(grid, "interaction_range", 1)),
        mode=mode,
        edge_field=float(_get(raw, "edge_field_hartree", 1e-7)),
        bond_weaken_eps=eps_list,
        tfim_j=float(_get(raw, "tfim", {}).get("coupling_j", 1.0)) if model == "tfim" else 1.0,
        engine=engine,
        dmrg=dmrg,
        excited_states=int(_get(dmrg_raw, "excited_states", 0)),
        analysis=analysis,
        output=_get(raw, "output", "runs/sweep"),
        workers=int(_get(raw, "workers", 1)),
        seed=int(_get(raw, "seed", 0)),
        notes=str(_get(raw, "notes", "")),
    )
    # Validate the whole grid eagerly so bad configs abort before any run.
    for n, r, eps in cfg.points():
        cfg.chain_spec(n, r, eps)
    if cfg.excited_states not in (0, 1, 2):
        raise ConfigError("dmrg.excited_states must be 0, 1 or 2")
    return cfg


def load_config(path) -> SweepConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse YAML: {exc}") from exc
    return parse_config(raw)
