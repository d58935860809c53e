"""Chain Hamiltonians: dipole-coupled rotors and the transverse-field Ising chain.

A chain is described by a ``ChainSpec``; ``chain_terms`` expands it into
explicit one-site and two-site terms, which feed both the MPO builder (for
DMRG) and the dense/matrix-free constructions in :mod:`rotorchain.ed`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import pi, sin

import numpy as np

from .sites import SiteBasis

DEFAULT_MPO_BUDGET_MB = 512.0

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


class ModelSizeError(RuntimeError):
    """The requested MPO would exceed the configured memory budget."""


def spin_half_basis() -> SiteBasis:
    """Ising spin-1/2 pseudo-site: sigma_z plays the role of the dipole."""
    zf = _SX.copy()
    basis = SiteBasis(kind="spin-half", dim=2, labels=(("up",), ("down",)),
                      h_rot=np.zeros((2, 2)), mu_x=_SX.copy(),
                      mu_y=np.zeros((2, 2)), mu_z=_SZ.copy(), mu=1.0,
                      z_flip=zf)
    for arr in (basis.h_rot, basis.mu_x, basis.mu_y, basis.mu_z, basis.z_flip):
        arr.flags.writeable = False
    return basis


@dataclass(frozen=True)
class ChainSpec:
    """Full problem definition for one chain Hamiltonian.

    ``spacing`` is the nearest-neighbour distance R in bohr for the dipolar
    models; for ``model='tfim'`` it is reused as the transverse field g.
    ``edge_field`` couples as -E . mu/|mu| at the first and last site, so its
    magnitude is an energy in hartree.
    """

    n_sites: int
    spacing: float
    basis: SiteBasis
    interaction_range: int = 1
    edge_field: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ssd: bool = False
    bond_weaken: float = 1.0
    model: str = "dipole"  # "dipole" | "tfim"
    tfim_j: float = 1.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("need at least two sites")
        if self.spacing <= 0 and self.model == "dipole":
            raise ValueError("spacing R must be positive")
        if not 1 <= self.interaction_range <= self.n_sites - 1:
            raise ValueError("interaction range K must satisfy 1 <= K <= N-1")
        if not 0.0 <= self.bond_weaken <= 1.0:
            raise ValueError("bond weakening factor must lie in [0, 1]")
        if self.ssd and self.bond_weaken < 1.0:
            raise ValueError("sine-square deformation and bond weakening are exclusive")
        if self.model not in ("dipole", "tfim"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.model == "tfim":
            if self.interaction_range != 1:
                raise ValueError("the Ising chain is nearest-neighbour only")
            if self.tfim_j <= 0:
                raise ValueError("Ising coupling J must be positive")
            if self.spacing < 0:
                raise ValueError("transverse field g must be non-negative")

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def central_bond(self) -> int:
        """1-indexed bond between sites N//2 and N//2+1."""
        return self.n_sites // 2

    def with_(self, **kw) -> "ChainSpec":
        return replace(self, **kw)


def tfim_chain(n_sites: int, j: float = 1.0, g: float = 1.0, **kw) -> ChainSpec:
    return ChainSpec(n_sites=n_sites, spacing=g, basis=spin_half_basis(),
                     model="tfim", tfim_j=j, **kw)


def dipole_dipole_coupling(basis: SiteBasis, r: float) -> list[tuple[np.ndarray, np.ndarray, float]]:
    """Channel decomposition of the point dipole-dipole interaction.

    For two dipoles separated by r along the chain (z) axis,
    V = (mu_x mu_x + mu_y mu_y - 2 mu_z mu_z) / r^3 in atomic units.
    """
    if r <= 0:
        raise ValueError("separation must be positive")
    inv = 1.0 / r**3
    return [
        (basis.mu_x, basis.mu_x, inv),
        (basis.mu_y, basis.mu_y, inv),
        (basis.mu_z, basis.mu_z, -2.0 * inv),
    ]


def ssd_weight(x: float, n_sites: int) -> float:
    """Sine-square envelope at position x (sites sit at x = i - 1/2, i = 1..N)."""
    return sin(pi * x / n_sites) ** 2


def _site_weight(spec: ChainSpec, i: int) -> float:
    # i is 0-indexed
    return ssd_weight(i + 0.5, spec.n_sites) if spec.ssd else 1.0


def _bond_weight(spec: ChainSpec, i: int, j: int) -> float:
    # i < j, 0-indexed; the envelope is evaluated at the pair midpoint.
    w = ssd_weight(0.5 * (i + j) + 0.5, spec.n_sites) if spec.ssd else 1.0
    if spec.bond_weaken < 1.0 and (i, j) == (spec.n_sites // 2 - 1, spec.n_sites // 2):
        w *= spec.bond_weaken
    return w


def _site_op(spec: ChainSpec, i: int) -> np.ndarray:
    basis = spec.basis
    if spec.model == "tfim":
        op = -spec.spacing * basis.mu_x
    else:
        op = basis.h_rot.copy()
    if i in (0, spec.n_sites - 1):
        ex, ey, ez = spec.edge_field
        if ex or ey or ez:
            op = op - (ex * basis.mu_x + ey * basis.mu_y + ez * basis.mu_z) / basis.mu
    return op


def _channels(spec: ChainSpec, distance_cells: int) -> list[tuple[np.ndarray, np.ndarray, float]]:
    if spec.model == "tfim":
        return [(spec.basis.mu_z, spec.basis.mu_z, -spec.tfim_j)]
    return dipole_dipole_coupling(spec.basis, distance_cells * spec.spacing)


def chain_terms(spec: ChainSpec):
    """Expand a ChainSpec into explicit (site, op) and (i, j, op_i, op_j, coeff) terms."""
    n = spec.n_sites
    site_terms = [(i, _site_weight(spec, i) * _site_op(spec, i)) for i in range(n)]
    bond_terms = []
    for delta in range(1, spec.interaction_range + 1):
        channels = _channels(spec, delta)
        for i in range(n - delta):
            j = i + delta
            w = _bond_weight(spec, i, j)
            for op_a, op_b, coeff in channels:
                c = w * coeff
                if c != 0.0:
                    bond_terms.append((i, j, op_a, op_b, c))
    return site_terms, bond_terms


@dataclass
class Mpo:
    """Matrix product operator; per-site tensors indexed (wl, wr, out, in)."""

    tensors: list[np.ndarray]
    site_ops: list[np.ndarray] = field(repr=False, default_factory=list)
    spec: ChainSpec | None = field(repr=False, default=None)
    energy_scale: float = 1.0

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors[:-1]]

    @property
    def phys_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors]

    def to_dense(self) -> np.ndarray:
        """Contract all tensors into the dense operator (small chains only)."""
        acc = self.tensors[0]  # (1, w, d, d)
        for t in self.tensors[1:]:
            # (1, w, D, D) x (w, w', d, d) -> (1, w', D*d, D*d)
            acc = np.einsum("awij,wbkl->abikjl", acc, t)
            s = acc.shape
            acc = acc.reshape(s[0], s[1], s[2] * s[3], s[4] * s[5])
        return acc[0, 0]


def build_mpo(spec: ChainSpec, budget_mb: float = DEFAULT_MPO_BUDGET_MB) -> Mpo:
    """Finite-state-machine MPO for the chain Hamiltonian.

    Interactions of range K with n_ch operator channels give bond dimension
    2 + n_ch*K. Pair coefficients are emitted on the completing site, which
    keeps site-dependent weights (envelope, weakened bond) exact.
    """
    n = spec.n_sites
    d = spec.basis.dim
    kmax = spec.interaction_range
    n_ch = 1 if spec.model == "tfim" else 3
    w = 2 + n_ch * kmax

    mem_mb = n * w * w * d * d * 8 / 2**20
    if mem_mb > budget_mb:
        raise ModelSizeError(
            f"MPO of bond dimension {w} for N={n}, d={d} needs {mem_mb:.0f} MiB "
            f"(budget {budget_mb:.0f} MiB)")

    ident = np.eye(d)
    site_terms, _ = chain_terms(spec)
    site_ops = [op for _, op in site_terms]

    def state(ch: int, dist: int) -> int:
        # dist = 1..kmax
        return 1 + ch * kmax + (dist - 1)

    last = w - 1
    # Bare starting operators per channel (coefficient joins at completion).
    if spec.model == "tfim":
        starts = [spec.basis.mu_z]
    else:
        starts = [spec.basis.mu_x, spec.basis.mu_y, spec.basis.mu_z]

    tensors = []
    for i in range(n):
        ten = np.zeros((w, w, d, d))
        ten[0, 0] = ident
        ten[last, last] = ident
        ten[0, last] = site_ops[i]
        for ch in range(n_ch):
            if i + 1 < n:
                ten[0, state(ch, 1)] = starts[ch]
            for dist in range(1, kmax + 1):
                start_site = i - dist
                if start_site < 0:
                    continue
                channels = _channels(spec, dist)
                _, op_b, coeff = channels[ch]
                c = _bond_weight(spec, start_site, i) * coeff
                ten[state(ch, dist), last] = c * op_b
                if dist < kmax and i + 1 < n:
                    ten[state(ch, dist), state(ch, dist + 1)] = ident
        tensors.append(ten)

    tensors[0] = tensors[0][:1]
    tensors[-1] = tensors[-1][:, last:]

    scale = max(np.linalg.norm(op, 2) * 2 for op in site_ops) if site_ops else 1.0
    coupling = sum(abs(c) * np.linalg.norm(a, 2) * np.linalg.norm(b, 2)
                   for a, b, c in _channels(spec, 1))
    scale = float(scale + 2 * coupling)
    return Mpo(tensors=tensors, site_ops=site_ops, spec=spec, energy_scale=scale)


def tfim_mpo(n_sites: int, j: float = 1.0, g: float = 1.0) -> Mpo:
    """H = -J sum sigma^z_i sigma^z_{i+1} - g sum sigma^x_i (bond dimension 3)."""
    return build_mpo(tfim_chain(n_sites, j=j, g=g))


def dense_hamiltonian(spec: ChainSpec, budget: int = 4096) -> np.ndarray:
    """Brute-force Kronecker-sum Hamiltonian (oracle for small chains)."""
    n, d = spec.n_sites, spec.basis.dim
    dim = d**n
    if dim > budget:
        raise ModelSizeError(f"dense Hamiltonian dimension {dim} exceeds budget {budget}")
    h = np.zeros((dim, dim))
    site_terms, bond_terms = chain_terms(spec)

    def embed(ops: dict[int, np.ndarray]) -> np.ndarray:
        acc = np.ones((1, 1))
        for i in range(n):
            acc = np.kron(acc, ops.get(i, np.eye(d)))
        return acc

    for i, op in site_terms:
        h += embed({i: op})
    for i, j, op_a, op_b, coeff in bond_terms:
        h += coeff * embed({i: op_a, j: op_b})
    return h


def global_z_flip(spec: ChainSpec, budget: int = 4096) -> np.ndarray:
    """Dense inversion operation: simultaneous mu_z -> -mu_z on every site."""
    n, d = spec.n_sites, spec.basis.dim
    if d**n > budget:
        raise ModelSizeError("global flip operator exceeds the dense budget")
    acc = np.ones((1, 1))
    for _ in range(n):
        acc = np.kron(acc, spec.basis.z_flip)
    return acc
