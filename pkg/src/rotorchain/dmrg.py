"""Two-site DMRG ground-state search and penalty-targeted excited states."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse.linalg as spsla

from . import kernels
from .model import Mpo
from .mps import MatrixProductState, load_mps, overlap, save_mps, split_two_site

_DENSE_DIM = 32  # below this, solve the local problem densely


class EigensolverError(RuntimeError):
    """The local eigensolver broke down."""


@dataclass(frozen=True)
class DmrgConfig:
    """Numerical parameters of one DMRG run.

    ``penalty_weight=None`` picks a scale-aware default from the MPO
    (it must dominate every physical gap of interest).
    """

    chi_max: int = 64
    cutoff: float = 1e-10
    max_sweeps: int = 24
    min_sweeps: int = 2
    tol_energy: float = 1e-10
    eig_tol: float = 1e-12
    eig_tol_start: float = 1e-6
    penalty_weight: float | None = None
    init: str = "local-ground"  # "local-ground" | "random" | "auto"
    seed: int = 0
    noise_amplitude: float = 0.0
    noise_decay: float = 0.25
    chi_ramp: bool = True
    checkpoint_path: str | None = None
    resume: bool = False

    def __post_init__(self):
        if self.tol_energy <= 0:
            raise ValueError("tol_energy must be positive")
        if self.max_sweeps < 2:
            raise ValueError("need at least two sweeps")
        if self.penalty_weight is not None and self.penalty_weight <= 0:
            raise ValueError("penalty weight must be positive")
        if self.init not in ("local-ground", "random", "auto"):
            raise ValueError(f"unknown init mode {self.init!r}")


@dataclass
class Diagnostics:
    sweeps: int = 0
    converged: bool = False
    final_delta_e: float = np.inf
    max_discarded: float = 0.0
    energy_history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


@dataclass
class EnergyLevels:
    """Lowest energies and gaps of one chain (hartree)."""

    e0: float
    e1: float = np.nan
    e2: float = np.nan
    diagnostics: list = field(default_factory=list)
    overlaps: list = field(default_factory=list)

    @property
    def gap1(self) -> float:
        return self.e1 - self.e0

    @property
    def gap2(self) -> float:
        return self.e2 - self.e0


def mpo_expectation(mpo: Mpo, psi: MatrixProductState) -> float:
    """<psi|H|psi> by full environment contraction (psi assumed normalized)."""
    env = np.ones((1, 1, 1))
    for w, a in zip(mpo.tensors, psi.tensors):
        env = kernels.update_left_env(env, w, a)
    return float(env[-1, 0, 0])


def _local_ground_product(mpo: Mpo, chi_max: int, cutoff: float,
                          excite_center: int = 0) -> MatrixProductState:
    states = []
    n = mpo.n_sites
    for i, op in enumerate(mpo.site_ops):
        _, vecs = np.linalg.eigh(op)
        level = excite_center if i == n // 2 else 0
        level = min(level, op.shape[0] - 1)
        states.append(vecs[:, level])
    return MatrixProductState.product_state(states, chi_max=chi_max, cutoff=cutoff)


def _polarized_product(mpo: Mpo, chi_max: int, cutoff: float) -> MatrixProductState:
    spec = mpo.spec
    if spec is None:
        raise ValueError("polarized seed needs the chain spec on the MPO")
    scale = mpo.energy_scale
    states = []
    for op in mpo.site_ops:
        _, vecs = np.linalg.eigh(op - scale * spec.basis.mu_z)
        states.append(vecs[:, 0])
    return MatrixProductState.product_state(states, chi_max=chi_max, cutoff=cutoff)


class _PenaltyTerm:
    """Orthogonality penalty against one previously converged state."""

    def __init__(self, phi: MatrixProductState, psi: MatrixProductState, weight: float):
        self.phi = phi
        self.weight = weight
        n = phi.n_sites
        self.left = [None] * (n + 1)
        self.right = [None] * (n + 1)
        self.left[0] = np.ones((1, 1))
        self.right[n] = np.ones((1, 1))
        for i in range(n - 1, 1, -1):
            self._update_right(psi, i)

    def _update_left(self, psi: MatrixProductState, i: int) -> None:
        # left[i+1][a_psi, a_phi] from site i
        env = self.left[i]
        t = np.tensordot(env, self.phi.tensors[i], axes=(1, 0))  # (apsi, d, bphi)
        self.left[i + 1] = np.tensordot(psi.tensors[i], t, axes=((0, 1), (0, 1)))

    def _update_right(self, psi: MatrixProductState, i: int) -> None:
        env = self.right[i + 1]
        t = np.tensordot(self.phi.tensors[i], env, axes=(2, 1))  # (aphi, d, bpsi)
        self.right[i] = np.tensordot(psi.tensors[i], t, axes=((1, 2), (1, 2)))

    def two_site_vector(self, i: int) -> np.ndarray:
        v = np.tensordot(self.left[i], self.phi.tensors[i], axes=(1, 0))
        v = np.tensordot(v, self.phi.tensors[i + 1], axes=(2, 0))
        return np.tensordot(v, self.right[i + 2], axes=(3, 1))


class _Sweeper:
    def __init__(self, mpo: Mpo, cfg: DmrgConfig, psi: MatrixProductState,
                 penalty_states: list[tuple[MatrixProductState, float]],
                 rng: np.random.Generator):
        self.mpo = mpo
        self.cfg = cfg
        self.psi = psi
        self.rng = rng
        n = mpo.n_sites
        psi.canonicalize(0)
        self.penalties = [_PenaltyTerm(phi, psi, w) for phi, w in penalty_states]
        self.lenv = [None] * (n + 1)
        self.renv = [None] * (n + 1)
        self.lenv[0] = np.ones((1, 1, 1))
        self.renv[n] = np.ones((1, 1, 1))
        for i in range(n - 1, 1, -1):
            self.renv[i] = kernels.update_right_env(
                self.renv[i + 1], mpo.tensors[i], psi.tensors[i])

    def _solve_local(self, i: int, theta0: np.ndarray, tol: float) -> tuple[float, np.ndarray]:
        lenv, renv = self.lenv[i], self.renv[i + 2]
        w1, w2 = self.mpo.tensors[i], self.mpo.tensors[i + 1]
        shape = theta0.shape
        dim = theta0.size
        pens = [(p.weight, p.two_site_vector(i)) for p in self.penalties]

        def matvec(x):
            th = x.reshape(shape)
            out = kernels.apply_heff2(lenv, w1, w2, renv, th)
            for wgt, vec in pens:
                out += wgt * np.dot(vec.reshape(-1), x) * vec
            return out.reshape(-1)

        if dim <= _DENSE_DIM:
            basisvecs = np.eye(dim)
            h = np.column_stack([matvec(basisvecs[:, k]) for k in range(dim)])
            h = 0.5 * (h + h.T)
            evals, evecs = np.linalg.eigh(h)
            return float(evals[0]), evecs[:, 0].reshape(shape)

        op = spsla.LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)
        v0 = theta0.reshape(-1)
        ncv = min(dim, 20)
        try:
            evals, evecs = spsla.eigsh(op, k=1, which="SA", v0=v0, ncv=ncv, tol=tol)
        except spsla.ArpackNoConvergence as exc:
            if len(exc.eigenvalues):
                evals, evecs = exc.eigenvalues, exc.eigenvectors
            else:
                try:
                    evals, evecs = spsla.eigsh(op, k=1, which="SA", v0=v0,
                                               ncv=min(dim, 40), tol=tol * 10)
                except spsla.ArpackError as exc2:
                    raise EigensolverError(f"local solve failed at site {i}: {exc2}") from exc2
        except spsla.ArpackError as exc:
            raise EigensolverError(f"local solve failed at site {i}: {exc}") from exc
        return float(evals[0]), evecs[:, 0].reshape(shape)

    def _theta(self, i: int) -> np.ndarray:
        return np.tensordot(self.psi.tensors[i], self.psi.tensors[i + 1], axes=(2, 0))

    def run(self) -> tuple[float, Diagnostics]:
        cfg = self.cfg
        diag = Diagnostics()
        n = self.mpo.n_sites
        energy = np.nan
        last_energy = np.inf
        first_full = None
        for sweep in range(cfg.max_sweeps):
            chi = min(cfg.chi_max, 8 * 2**sweep) if cfg.chi_ramp else cfg.chi_max
            if chi >= cfg.chi_max and first_full is None:
                first_full = sweep
            tol = max(cfg.eig_tol, cfg.eig_tol_start * 0.1**sweep)
            noise = cfg.noise_amplitude * cfg.noise_decay**sweep
            max_disc = 0.0

            for i, to_right in [(j, True) for j in range(n - 1)] + \
                               [(j, False) for j in range(n - 2, -1, -1)]:
                assert self.psi.center == (i if to_right else i + 1)
                energy, theta = self._solve_local(i, self._theta(i), tol)
                if noise > 0.0:
                    theta = theta + noise * self.rng.normal(size=theta.shape) \
                        * np.linalg.norm(theta) / np.sqrt(theta.size)
                a, s, b, disc = split_two_site(theta, chi, cfg.cutoff)
                max_disc = max(max_disc, disc)
                if to_right:
                    self.psi.tensors[i] = a
                    self.psi.tensors[i + 1] = np.ascontiguousarray(
                        s[:, None, None] * b)
                    self.psi.center = i + 1
                    self.lenv[i + 1] = kernels.update_left_env(
                        self.lenv[i], self.mpo.tensors[i], a)
                    for p in self.penalties:
                        p._update_left(self.psi, i)
                else:
                    self.psi.tensors[i] = np.ascontiguousarray(
                        a * s[None, None, :])
                    self.psi.tensors[i + 1] = b
                    self.psi.center = i
                    self.renv[i + 1] = kernels.update_right_env(
                        self.renv[i + 2], self.mpo.tensors[i + 1], b)
                    for p in self.penalties:
                        p._update_right(self.psi, i + 1)

            diag.sweeps = sweep + 1
            diag.energy_history.append(energy)
            diag.max_discarded = max(diag.max_discarded, max_disc)
            delta = abs(energy - last_energy)
            last_energy = energy
            settled = first_full is not None and sweep > first_full
            if settled and sweep + 1 >= cfg.min_sweeps and delta < cfg.tol_energy:
                diag.converged = True
                diag.final_delta_e = delta
                break
            diag.final_delta_e = delta
        if not diag.converged:
            diag.warnings.append(
                f"not converged after {diag.sweeps} sweeps (dE={diag.final_delta_e:.3e})")
        self.psi.canonicalize(0)
        return mpo_expectation(self.mpo, self.psi), diag


def _initial_state(mpo: Mpo, cfg: DmrgConfig, rng: np.random.Generator,
                   excite_center: int = 0) -> MatrixProductState:
    if cfg.init == "random":
        return MatrixProductState.random(mpo.phys_dims, chi=4, rng=rng,
                                         chi_max=cfg.chi_max, cutoff=cfg.cutoff)
    return _local_ground_product(mpo, cfg.chi_max, cfg.cutoff, excite_center)


def _optimize(mpo: Mpo, cfg: DmrgConfig, psi0: MatrixProductState,
              penalty_states=(), seed_offset: int = 0):
    rng = np.random.default_rng((cfg.seed, seed_offset))
    sweeper = _Sweeper(mpo, cfg, psi0, list(penalty_states), rng)
    energy, diag = sweeper.run()
    return sweeper.psi, energy, diag


def ground_state(mpo: Mpo, config: DmrgConfig,
                 psi0: MatrixProductState | None = None):
    """Variational ground-state search.

    Returns (psi, energy, diagnostics). With ``init='auto'`` a second run
    from a symmetry-broken product seed is performed and kept only if it
    is lower by a clear margin (beyond convergence noise), so that exactly
    degenerate ordered phases resolve to the inversion-symmetric state.
    """
    if config.chi_max < max(mpo.phys_dims):
        raise ValueError("chi_max must be at least the local dimension")
    if psi0 is None and config.resume and config.checkpoint_path \
            and os.path.exists(config.checkpoint_path):
        psi0 = load_mps(config.checkpoint_path)
    if psi0 is not None:
        psi0 = psi0.copy()
        psi0.chi_max = config.chi_max
        psi0.cutoff = config.cutoff
        cfg = replace(config, chi_ramp=False)
        psi, energy, diag = _optimize(mpo, cfg, psi0)
    else:
        psi, energy, diag = _optimize(mpo, config, _initial_state(mpo, config,
                                      np.random.default_rng(config.seed)))
        if config.init == "auto" and mpo.spec is not None:
            psi_b, e_b, diag_b = _optimize(
                mpo, config, _polarized_product(mpo, config.chi_max, config.cutoff),
                seed_offset=1)
            margin = max(10 * config.tol_energy, 1e-12 * abs(energy))
            if e_b < energy - margin:
                psi, energy, diag = psi_b, e_b, diag_b
                diag.warnings.append("kept symmetry-broken seed (lower energy)")
    if config.checkpoint_path:
        save_mps(config.checkpoint_path, psi)
    return psi, energy, diag


def excited_states(mpo: Mpo, config: DmrgConfig, k: int = 2,
                   ground: tuple | None = None):
    """Penalty-method targeting of the lowest ``k`` excitations.

    Returns (EnergyLevels, [states]). Each level minimizes <H> plus
    ``w`` times the squared overlap with all lower states.
    """
    if ground is None:
        psi, e0, diag0 = ground_state(mpo, config)
    else:
        psi, e0, diag0 = ground
    weight = config.penalty_weight
    if weight is None:
        weight = 10.0 * mpo.energy_scale
    levels = EnergyLevels(e0=e0, diagnostics=[diag0])
    states = [psi]
    energies = [e0]
    for m in range(1, k + 1):
        seed = _initial_state(mpo, config, np.random.default_rng((config.seed, m)),
                              excite_center=m)
        penalty_states = [(phi, weight) for phi in states]
        psi_m, e_m, diag_m = _optimize(mpo, config, seed, penalty_states,
                                       seed_offset=m)
        ovl = [abs(overlap(phi, psi_m)) for phi in states]
        if max(ovl) > 1e-4:
            diag_m.warnings.append(
                f"level {m} overlap with lower states {max(ovl):.2e} (penalty too weak?)")
        levels.overlaps.append(max(ovl))
        levels.diagnostics.append(diag_m)
        states.append(psi_m)
        energies.append(e_m)
    order = np.argsort(energies[1:]) + 1
    ordered = [energies[0]] + [energies[int(i)] for i in order]
    states = [states[0]] + [states[int(i)] for i in order]
    if k >= 1:
        levels.e1 = ordered[1]
    if k >= 2:
        levels.e2 = ordered[2]
    return levels, states
