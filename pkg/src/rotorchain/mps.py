"""Finite matrix product states: canonical forms, truncation, measurement.

Tensors are real float64 with index order (left bond, physical, right bond).
Bonds are numbered 1..N-1; bond n separates sites 1..n from n+1..N
(1-indexed), i.e. it sits after 0-indexed site n-1.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_ISO_TOL = 1e-10
_DEGEN_RTOL = 1e-10


class SvdError(RuntimeError):
    """Numerical breakdown inside a local SVD."""


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Squared Schmidt coefficients (eigenvalues of rho_A) at one bond."""

    bond: int
    values: np.ndarray  # descending, sums to 1

    @property
    def count(self) -> int:
        return len(self.values)

    def entropy(self) -> float:
        lam = self.values[self.values > 0.0]
        return float(-np.sum(lam * np.log(lam)))

    def gap(self) -> float:
        lam1 = self.values[0]
        lam2 = self.values[1] if len(self.values) > 1 else 0.0
        return float(lam1 - lam2)


def _robust_svd(mat: np.ndarray):
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; retry via the slower gesvd
        try:
            import scipy.linalg as sla

            return sla.svd(mat, full_matrices=False, lapack_driver="gesvd")
        except Exception as exc:  # pragma: no cover - pathological input
            raise SvdError(f"local SVD failed: {exc}") from exc


def truncation_rank(s: np.ndarray, chi_max: int, cutoff: float) -> int:
    """Number of singular values to keep.

    Keeps the smallest k with discarded weight (sum of squared dropped
    values, input assumed normalized) below ``cutoff``, capped at
    ``chi_max``. Degenerate values are kept or dropped as a block: the cut
    is moved so it never splits a multiplet, preferring to keep more states
    while the cap allows it.
    """
    if s[0] <= 0.0:
        return 1
    w = np.cumsum(s[::-1] ** 2)[::-1]  # w[k] = discarded weight if k kept
    keep = np.nonzero(w <= cutoff)[0]
    k = int(keep[0]) if len(keep) else len(s)
    k = max(1, min(k, chi_max, len(s)))
    tol = _DEGEN_RTOL * s[0]
    while k < min(chi_max, len(s)) and s[k - 1] - s[k] < tol:
        k += 1
    while k > 1 and k < len(s) and s[k - 1] - s[k] < tol:
        k -= 1
    return k


def split_two_site(theta: np.ndarray, chi_max: int, cutoff: float):
    """SVD split of a two-site tensor (Dl, d1, d2, Dr).

    Returns (A, s, B, discarded) with A left-isometric (Dl, d1, k), B
    right-isometric (k, d2, Dr), s the kept singular values renormalized to
    unit norm, and ``discarded`` the truncated weight of the normalized
    input.
    """
    dl, d1, d2, dr = theta.shape
    u, s, vt = _robust_svd(theta.reshape(dl * d1, d2 * dr))
    norm = np.linalg.norm(s)
    if norm == 0.0:
        raise SvdError("two-site tensor has zero norm")
    sn = s / norm
    k = truncation_rank(sn, chi_max, cutoff)
    discarded = float(np.sum(sn[k:] ** 2))
    u = u[:, :k]
    vt = vt[:k]
    skept = sn[:k] / np.linalg.norm(sn[:k])
    return (u.reshape(dl, d1, k), skept, vt.reshape(k, d2, dr), discarded)


class MatrixProductState:
    """Open-boundary MPS with an optional orthogonality center."""

    def __init__(self, tensors: list[np.ndarray], chi_max: int = 64,
                 cutoff: float = 1e-10, center: int | None = None):
        self.tensors = [np.ascontiguousarray(t, dtype=np.float64) for t in tensors]
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for a, b in zip(self.tensors, self.tensors[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("mismatched internal bond dimensions")
        self.chi_max = int(chi_max)
        self.cutoff = float(cutoff)
        self.center = center

    # -- construction -------------------------------------------------

    @classmethod
    def product_state(cls, local_states: list[np.ndarray], chi_max: int = 64,
                      cutoff: float = 1e-10) -> "MatrixProductState":
        tensors = []
        for v in local_states:
            v = np.asarray(v, dtype=np.float64)
            v = v / np.linalg.norm(v)
            tensors.append(v.reshape(1, -1, 1))
        psi = cls(tensors, chi_max=chi_max, cutoff=cutoff, center=0)
        return psi

    @classmethod
    def random(cls, dims: list[int], chi: int, rng: np.random.Generator,
               chi_max: int = 64, cutoff: float = 1e-10) -> "MatrixProductState":
        n = len(dims)
        bonds = [1]
        for i in range(1, n):
            bonds.append(min(chi, bonds[-1] * dims[i - 1],
                             int(np.prod(dims[i:], dtype=np.int64))))
        bonds.append(1)
        tensors = [rng.normal(size=(bonds[i], dims[i], bonds[i + 1]))
                   for i in range(n)]
        psi = cls(tensors, chi_max=chi_max, cutoff=cutoff, center=None)
        psi.canonicalize(0)
        return psi

    # -- basic properties ----------------------------------------------

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors]

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MatrixProductState":
        return MatrixProductState([t.copy() for t in self.tensors],
                                  chi_max=self.chi_max, cutoff=self.cutoff,
                                  center=self.center)

    def norm(self) -> float:
        return float(np.sqrt(abs(overlap(self, self))))

    # -- canonical form -------------------------------------------------

    def _shift_right(self, i: int, truncate: bool) -> float:
        t = self.tensors[i]
        dl, d, dr = t.shape
        u, s, vt = _robust_svd(t.reshape(dl * d, dr))
        disc = 0.0
        if truncate:
            norm = np.linalg.norm(s)
            sn = s / norm if norm > 0 else s
            k = truncation_rank(sn, self.chi_max, self.cutoff)
            disc = float(np.sum(sn[k:] ** 2))
            u, s, vt = u[:, :k], s[:k], vt[:k]
        self.tensors[i] = np.ascontiguousarray(u.reshape(dl, d, -1))
        carry = (s[:, None] * vt)
        self.tensors[i + 1] = np.ascontiguousarray(
            np.tensordot(carry, self.tensors[i + 1], axes=(1, 0)))
        return disc

    def _shift_left(self, i: int, truncate: bool) -> float:
        t = self.tensors[i]
        dl, d, dr = t.shape
        u, s, vt = _robust_svd(t.reshape(dl, d * dr))
        disc = 0.0
        if truncate:
            norm = np.linalg.norm(s)
            sn = s / norm if norm > 0 else s
            k = truncation_rank(sn, self.chi_max, self.cutoff)
            disc = float(np.sum(sn[k:] ** 2))
            u, s, vt = u[:, :k], s[:k], vt[:k]
        self.tensors[i] = np.ascontiguousarray(vt.reshape(-1, d, dr))
        carry = u * s[None, :]
        self.tensors[i - 1] = np.ascontiguousarray(
            np.tensordot(self.tensors[i - 1], carry, axes=(2, 0)))
        return disc

    def move_center_to(self, site: int, truncate: bool = False) -> float:
        """Move the orthogonality center, sweeping local SVDs.

        Returns the accumulated discarded weight (0 unless truncating).
        """
        if not 0 <= site < self.n_sites:
            raise IndexError("center out of range")
        if self.center is None:
            self.center = self.n_sites - 1
            for i in range(self.n_sites - 1, 0, -1):
                self._shift_left(i, truncate=False)
            self.center = 0
        disc = 0.0
        while self.center < site:
            disc += self._shift_right(self.center, truncate)
            self.center += 1
        while self.center > site:
            disc += self._shift_left(self.center, truncate)
            self.center -= 1
        return disc

    def canonicalize(self, center: int = 0) -> "MatrixProductState":
        """Bring to mixed-canonical form about ``center`` and normalize.

        When the orthogonality center is already tracked this only moves
        it (a no-op if it is in place), so canonicalizing twice leaves the
        tensors untouched.
        """
        self.move_center_to(center)
        c = self.tensors[center]
        nrm = np.linalg.norm(c)
        if nrm == 0.0:
            raise SvdError("state has zero norm")
        self.tensors[center] = c / nrm
        return self

    # -- measurement ------------------------------------------------------

    def schmidt_spectrum(self, bond: int) -> SchmidtSpectrum:
        """Squared Schmidt values at ``bond`` (1..N-1)."""
        if not 1 <= bond <= self.n_sites - 1:
            raise IndexError("bond out of range")
        self.move_center_to(bond - 1)
        t = self.tensors[bond - 1]
        dl, d, dr = t.shape
        s = np.linalg.svd(t.reshape(dl * d, dr), compute_uv=False)
        lam = s**2
        lam = lam / lam.sum()
        lam = np.sort(lam)[::-1]
        return SchmidtSpectrum(bond=bond, values=lam)

    def expectation(self, ops: list[tuple[int, np.ndarray]]) -> float:
        """<psi| prod_i O_i |psi> for one-site operators at distinct sites."""
        if not ops:
            return float(overlap(self, self))
        sites = [s for s, _ in ops]
        if len(set(sites)) != len(sites):
            raise ValueError("operator sites must be distinct")
        if min(sites) < 0 or max(sites) >= self.n_sites:
            raise IndexError("operator site out of range")
        opmap = dict(ops)
        lo, hi = min(sites), max(sites)
        self.move_center_to(lo)
        env = np.eye(self.tensors[lo].shape[0])
        for i in range(lo, hi + 1):
            t = self.tensors[i]
            tk = t if i not in opmap else np.tensordot(
                opmap[i], t, axes=(1, 1)).transpose(1, 0, 2)
            env = np.tensordot(env, tk, axes=(1, 0))
            env = np.tensordot(t, env, axes=((0, 1), (0, 1)))
        return float(np.trace(env))

    def expectation_one(self, site: int, op: np.ndarray) -> float:
        return self.expectation([(site, op)])

    def expectation_two(self, i: int, op_i: np.ndarray, j: int, op_j: np.ndarray) -> float:
        if i == j:
            return self.expectation([(i, op_i @ op_j)])
        return self.expectation([(i, op_i), (j, op_j)])

    def to_dense(self) -> np.ndarray:
        vec = self.tensors[0][0]  # (d, D)
        for t in self.tensors[1:]:
            vec = np.tensordot(vec, t, axes=(vec.ndim - 1, 0))
        return vec.reshape(-1)


def overlap(bra: MatrixProductState, ket: MatrixProductState) -> float:
    """<bra|ket> (real arithmetic)."""
    if bra.n_sites != ket.n_sites:
        raise ValueError("length mismatch")
    env = np.ones((1, 1))
    for tb, tk in zip(bra.tensors, ket.tensors):
        env = np.tensordot(env, tk, axes=(1, 0))
        env = np.tensordot(tb, env, axes=((0, 1), (0, 1)))
    return float(env[0, 0])


# -- checkpoint format -------------------------------------------------
#
# Little-endian binary container:
#   8 bytes   magic "RCMPSv01"
#   int32     N
#   int32     center (-1 for none)
#   int32     chi_max
#   float64   cutoff
#   per site: int32 x3 tensor shape, then float64 row-major data
_MAGIC = b"RCMPSv01"


def save_mps(path, psi: MatrixProductState) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        center = -1 if psi.center is None else psi.center
        fh.write(struct.pack("<iii", psi.n_sites, center, psi.chi_max))
        fh.write(struct.pack("<d", psi.cutoff))
        for t in psi.tensors:
            fh.write(struct.pack("<iii", *t.shape))
            fh.write(np.ascontiguousarray(t).tobytes())


def load_mps(path) -> MatrixProductState:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"not a checkpoint file (magic {magic!r})")
        n, center, chi_max = struct.unpack("<iii", fh.read(12))
        (cutoff,) = struct.unpack("<d", fh.read(8))
        tensors = []
        for _ in range(n):
            shape = struct.unpack("<iii", fh.read(12))
            count = shape[0] * shape[1] * shape[2]
            data = np.frombuffer(fh.read(count * 8), dtype="<f8").copy()
            tensors.append(data.reshape(shape))
    return MatrixProductState(tensors, chi_max=chi_max, cutoff=cutoff,
                              center=None if center < 0 else center)
