"""Exact diagonalization oracles for small chains.

Dense construction up to d^N = 4096 by default and matrix-free Lanczos
(ARPACK with full reorthogonalization of the Krylov basis) up to 2^20.
Ground truth for every other module at small N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spsla

from .model import ChainSpec, chain_terms, dense_hamiltonian

DENSE_LIMIT = 4096
ITER_LIMIT = 2**20
_EIGH_LIMIT = 512
_DEGEN_RTOL = 1e-11


class BudgetError(RuntimeError):
    """Problem size exceeds the configured exact-diagonalization budget."""


@dataclass
class SpectrumResult:
    energies: np.ndarray  # ascending
    vectors: np.ndarray  # (dim, k)
    residuals: np.ndarray
    method: str


def _problem_dim(spec: ChainSpec) -> int:
    return spec.basis.dim**spec.n_sites


def apply_site_op(vec: np.ndarray, d: int, n: int, site: int, op: np.ndarray) -> np.ndarray:
    v = vec.reshape(d**site, d, -1)
    out = np.einsum("ab,xbz->xaz", op, v)
    return out.reshape(vec.shape)


def hamiltonian_matvec(spec: ChainSpec):
    """Matrix-free H application; pair terms are pre-combined per bond."""
    d, n = spec.basis.dim, spec.n_sites
    site_terms, bond_terms = chain_terms(spec)
    pair_ops = {}
    for i, j, op_a, op_b, coeff in bond_terms:
        key = (i, j)
        block = coeff * np.kron(op_a, op_b)
        pair_ops[key] = pair_ops.get(key, 0.0) + block

    def matvec(vec):
        out = np.zeros_like(vec)
        for i, op in site_terms:
            out += apply_site_op(vec, d, n, i, op)
        for (i, j), block in pair_ops.items():
            v = vec.reshape(d**i, d, d**(j - i - 1), d, -1)
            v = np.moveaxis(v, 3, 2).reshape(d**i, d * d, -1)
            w = np.einsum("ab,xbz->xaz", block, v)
            w = np.moveaxis(w.reshape(d**i, d, d, d**(j - i - 1), -1), 2, 3)
            out += w.reshape(vec.shape)
        return out

    return matvec


def _fix_degeneracies(evals: np.ndarray, evecs: np.ndarray) -> np.ndarray:
    """Deterministic basis inside degenerate groups (fixed pivot observable)."""
    scale = max(1.0, float(np.max(np.abs(evals))))
    dim = evecs.shape[0]
    probe = np.linspace(1.0, 2.0, dim)
    out = evecs.copy()
    start = 0
    while start < len(evals):
        stop = start + 1
        while stop < len(evals) and evals[stop] - evals[stop - 1] < _DEGEN_RTOL * scale:
            stop += 1
        if stop - start > 1:
            block = out[:, start:stop]
            m = block.T @ (probe[:, None] * block)
            m = 0.5 * (m + m.T)
            _, rot = np.linalg.eigh(m)
            out[:, start:stop] = block @ rot
        start = stop
    for col in range(out.shape[1]):
        pivot = int(np.argmax(np.abs(out[:, col])))
        if out[pivot, col] < 0:
            out[:, col] = -out[:, col]
    return out


def dense_spectrum(spec: ChainSpec, k: int = 1,
                   dense_limit: int = DENSE_LIMIT,
                   iter_limit: int = ITER_LIMIT) -> SpectrumResult:
    """Lowest-k eigenpairs of the chain Hamiltonian.

    Small problems go through a full dense eigh; larger ones through
    matrix-free restarted Lanczos with a deterministic start vector.
    """
    dim = _problem_dim(spec)
    if dim > iter_limit:
        raise BudgetError(f"dimension {dim} exceeds the iterative budget {iter_limit}")
    matvec = hamiltonian_matvec(spec)
    if dim <= min(_EIGH_LIMIT, dense_limit):
        h = dense_hamiltonian(spec, budget=dense_limit)
        evals, evecs = np.linalg.eigh(h)
        evals, evecs = evals[:k], evecs[:, :k]
        method = "dense-eigh"
    else:
        kk = min(dim - 2, k + 4)
        v0 = np.random.default_rng(1234).normal(size=dim)
        op = spsla.LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)
        evals, evecs = spsla.eigsh(op, k=kk, which="SA", v0=v0,
                                   ncv=min(dim, max(4 * kk, 40)), tol=1e-13,
                                   maxiter=200 * kk)
        order = np.argsort(evals)
        evals, evecs = evals[order][:k], evecs[:, order][:, :k]
        method = "lanczos"
    evecs = _fix_degeneracies(evals, evecs)
    residuals = np.array([np.linalg.norm(matvec(evecs[:, i]) - evals[i] * evecs[:, i])
                          for i in range(evecs.shape[1])])
    return SpectrumResult(energies=evals, vectors=evecs, residuals=residuals,
                          method=method)


# -- observables on dense eigenvectors ---------------------------------

def reduced_density_spectrum(vec: np.ndarray, d: int, n: int, n_left: int) -> np.ndarray:
    """Eigenvalues of the reduced density matrix of sites 1..n_left, descending."""
    if not 1 <= n_left <= n - 1:
        raise ValueError("bipartition out of range")
    mat = vec.reshape(d**n_left, d**(n - n_left))
    s = np.linalg.svd(mat, compute_uv=False)
    lam = s**2
    lam = lam / lam.sum()
    return np.sort(lam)[::-1]


def entanglement_entropy_dense(vec: np.ndarray, d: int, n: int, n_left: int) -> float:
    lam = reduced_density_spectrum(vec, d, n, n_left)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def expectation_dense(vec: np.ndarray, d: int, n: int,
                      ops: list[tuple[int, np.ndarray]]) -> float:
    w = vec
    for site, op in ops:
        w = apply_site_op(w, d, n, site, op)
    return float(vec @ w)


def measure_dense(vec: np.ndarray, spec: ChainSpec, mode: str,
                  e0: float, e1: float = np.nan, e2: float = np.nan):
    """RunRecord for a dense eigenvector (same fields as the MPS path)."""
    from .observables import N_SCHMIDT_STORED, RunRecord

    d, n = spec.basis.dim, spec.n_sites
    mz = spec.basis.mu_z
    profile = np.array([entanglement_entropy_dense(vec, d, n, nl)
                        for nl in range(1, n)])
    lam_center = reduced_density_spectrum(vec, d, n, n // 2)[:N_SCHMIDT_STORED]
    c_nn = np.mean([expectation_dense(vec, d, n, [(i, mz), (i + 1, mz)])
                    for i in range(n - 1)])
    m = (n - 1) // 2
    corr = np.empty(n)
    for j in range(n):
        ops = [(m, mz @ mz)] if j == m else [(m, mz), (j, mz)]
        corr[j] = expectation_dense(vec, d, n, ops)
    pol = np.mean([expectation_dense(vec, d, n, [(i, mz)]) for i in range(n)])
    return RunRecord(
        n_sites=n, spacing=spec.spacing, interaction_range=spec.interaction_range,
        mode=mode, engine="ed", e0=float(e0), e1=float(e1), e2=float(e2),
        entropy_profile=profile, schmidt_center=lam_center, c_nn=float(c_nn),
        corr_site=m, corr_profile=corr, polarization=float(pol),
    )
