"""Observables of converged chain states.

Entropies and Schmidt spectra use the natural logarithm throughout. The
Schmidt gap and the stored Schmidt values refer to the central bond
N//2 (1-indexed bonds).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ChainSpec
from .mps import MatrixProductState

N_SCHMIDT_STORED = 16


@dataclass
class RunRecord:
    """Everything measured at one converged (N, R, mode) point."""

    n_sites: int
    spacing: float
    interaction_range: int
    mode: str
    engine: str
    e0: float
    e1: float = np.nan
    e2: float = np.nan
    entropy_profile: np.ndarray = field(default_factory=lambda: np.zeros(0))
    schmidt_center: np.ndarray = field(default_factory=lambda: np.zeros(0))
    c_nn: float = np.nan
    corr_site: int = -1
    corr_profile: np.ndarray = field(default_factory=lambda: np.zeros(0))
    polarization: float = np.nan
    diagnostics: dict = field(default_factory=dict)

    @property
    def gap1(self) -> float:
        return self.e1 - self.e0

    @property
    def gap2(self) -> float:
        return self.e2 - self.e0

    @property
    def schmidt_gap(self) -> float:
        lam = self.schmidt_center
        if len(lam) == 0:
            return np.nan
        lam2 = lam[1] if len(lam) > 1 else 0.0
        return float(lam[0] - lam2)

    @property
    def entropy_center(self) -> float:
        return float(self.entropy_profile[self.n_sites // 2 - 1])


def entanglement_entropy(psi: MatrixProductState, bond: int) -> float:
    """S_vN = -sum lambda ln lambda at the given bond (1..N-1)."""
    return psi.schmidt_spectrum(bond).entropy()


def entropy_profile(psi: MatrixProductState) -> np.ndarray:
    """S_vN at every bond, left to right."""
    n = psi.n_sites
    out = np.empty(n - 1)
    psi.move_center_to(0)
    for bond in range(1, n):
        out[bond - 1] = psi.schmidt_spectrum(bond).entropy()
    return out


def schmidt_gap(psi: MatrixProductState) -> float:
    """lambda_1 - lambda_2 at the central bond N//2."""
    return psi.schmidt_spectrum(psi.n_sites // 2).gap()


def schmidt_values(psi: MatrixProductState, bond: int | None = None,
                   count: int = N_SCHMIDT_STORED) -> np.ndarray:
    if bond is None:
        bond = psi.n_sites // 2
    lam = psi.schmidt_spectrum(bond).values
    return lam[:count]


def dipole_correlation(psi: MatrixProductState, spec: ChainSpec, m: int, j: int,
                       connected: bool = False) -> float:
    """<mu^z_m mu^z_j> between (0-indexed) sites m and j; raw by default."""
    mz = spec.basis.mu_z
    val = psi.expectation_two(m, mz, j, mz)
    if connected and m != j:
        val -= psi.expectation_one(m, mz) * psi.expectation_one(j, mz)
    return val


def nn_correlation(psi: MatrixProductState, spec: ChainSpec) -> float:
    """C = (1/(N-1)) sum_i <mu^z_i mu^z_{i+1}>."""
    mz = spec.basis.mu_z
    n = psi.n_sites
    total = sum(psi.expectation_two(i, mz, i + 1, mz) for i in range(n - 1))
    return total / (n - 1)


def correlation_profile(psi: MatrixProductState, spec: ChainSpec,
                        m: int | None = None) -> tuple[int, np.ndarray]:
    """<mu^z_m mu^z_j> for every j, with m the central site unless given."""
    n = psi.n_sites
    if m is None:
        m = (n - 1) // 2  # central site, exact for odd N
    mz = spec.basis.mu_z
    out = np.empty(n)
    for j in range(n):
        out[j] = psi.expectation_two(m, mz, j, mz) if j != m \
            else psi.expectation_one(m, mz @ mz)
    return m, out


def polarization(psi: MatrixProductState, spec: ChainSpec) -> float:
    """p = (1/N) sum_i <mu^z_i>."""
    mz = spec.basis.mu_z
    return float(np.mean([psi.expectation_one(i, mz) for i in range(psi.n_sites)]))


def nn_correlation_derivative(spacings: np.ndarray, values: np.ndarray):
    """dC/dR by central differences (one-sided at the grid edges)."""
    r = np.asarray(spacings, dtype=float)
    c = np.asarray(values, dtype=float)
    if len(r) < 3:
        raise ValueError("need at least three grid points")
    order = np.argsort(r)
    r, c = r[order], c[order]
    if np.any(np.diff(r) <= 0):
        raise ValueError("grid points must be distinct")
    return r, np.gradient(c, r)


def measure_state(psi: MatrixProductState, spec: ChainSpec, mode: str,
                  engine: str, e0: float, e1: float = np.nan, e2: float = np.nan,
                  diagnostics: dict | None = None,
                  with_corr_profile: bool = True) -> RunRecord:
    """Collect the full RunRecord for one converged state."""
    m, prof = correlation_profile(psi, spec) if with_corr_profile else (-1, np.zeros(0))
    return RunRecord(
        n_sites=spec.n_sites,
        spacing=spec.spacing,
        interaction_range=spec.interaction_range,
        mode=mode,
        engine=engine,
        e0=e0, e1=e1, e2=e2,
        entropy_profile=entropy_profile(psi),
        schmidt_center=schmidt_values(psi),
        c_nn=nn_correlation(psi, spec),
        corr_site=m,
        corr_profile=prof,
        polarization=polarization(psi, spec),
        diagnostics=diagnostics or {},
    )
