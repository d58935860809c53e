"""Single-molecule rotational bases and lab-frame dipole operators.

Two site types are supported: a linear rotor (spherical-harmonic states
|j,m>) and a rigid asymmetric top with the dipole along its twofold
symmetry axis, which is the intermediate (b) principal axis. Both are
truncated at j <= j_max, realified so all operator matrices are real
symmetric, and optionally filtered to the para nuclear-spin species
(K_a + K_c even).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .angular import clebsch_gordan
from .units import hartree_to_cm1

_REAL_TOL = 1e-12


@dataclass(frozen=True)
class RotorParams:
    """Physical definition of one rotor site (energies in hartree, dipole in e*bohr)."""

    kind: str  # "linear" | "asymmetric-top"
    mu: float
    j_max: int
    b: float = 0.0  # linear rotor constant
    a_const: float = 0.0  # asymmetric top A >= B >= C > 0
    b_const: float = 0.0
    c_const: float = 0.0
    spin_filter: str = "none"  # "none" | "para"

    def __post_init__(self):
        if self.kind not in ("linear", "asymmetric-top"):
            raise ValueError(f"unknown rotor kind {self.kind!r}")
        if self.spin_filter not in ("none", "para"):
            raise ValueError(f"unknown spin filter {self.spin_filter!r}")
        if self.mu <= 0:
            raise ValueError("dipole magnitude mu must be positive")
        if self.j_max < 1:
            raise ValueError("j_max must be at least 1 (j_max=0 is a trivial site)")
        if self.kind == "linear":
            if self.b <= 0:
                raise ValueError("linear rotor needs B > 0")
            if self.spin_filter != "none":
                raise ValueError("spin filter is only defined for the asymmetric top")
        else:
            if not (self.a_const >= self.b_const >= self.c_const > 0):
                raise ValueError("asymmetric top needs A >= B >= C > 0")

    @classmethod
    def linear(cls, b: float, mu: float, j_max: int) -> "RotorParams":
        return cls(kind="linear", b=b, mu=mu, j_max=j_max)

    @classmethod
    def asymmetric_top(cls, a: float, b: float, c: float, mu: float, j_max: int,
                       spin_filter: str = "para") -> "RotorParams":
        return cls(kind="asymmetric-top", a_const=a, b_const=b, c_const=c,
                   mu=mu, j_max=j_max, spin_filter=spin_filter)


@dataclass(frozen=True)
class SiteBasis:
    """Realified rotational eigenbasis with lab-frame dipole matrices.

    ``h_rot`` is diagonal (this is the eigenbasis). ``mu_x/mu_y/mu_z`` are
    real symmetric. ``z_flip`` is the single-site involution that flips the
    sign of mu_z while leaving h_rot, mu_x and mu_y invariant; conjugating
    every site with it implements the global inversion of the chain.
    """

    kind: str
    dim: int
    labels: tuple
    h_rot: np.ndarray
    mu_x: np.ndarray
    mu_y: np.ndarray
    mu_z: np.ndarray
    mu: float
    z_flip: np.ndarray
    params: RotorParams | None = field(default=None, compare=False)

    @property
    def energies(self) -> np.ndarray:
        return np.diag(self.h_rot)

    @property
    def site_gap(self) -> float:
        e = np.sort(self.energies)
        return float(e[-1] - e[0]) if self.dim > 1 else 0.0

    def label_text(self, idx: int) -> str:
        lab = self.labels[idx]
        if self.kind == "linear":
            j, mtag = lab
            return f"j={j} {mtag}"
        j, ka, kc, mtag = lab
        return f"{j}_{ka}{kc} {mtag}"


def _m_tags(j: int) -> list[str]:
    tags = ["m0"]
    for m in range(1, j + 1):
        tags += [f"c{m}", f"s{m}"]
    return tags


def _m_real_unitary(j: int) -> np.ndarray:
    """Columns express real-m combinations in the complex |m=-j..j> basis."""
    dim = 2 * j + 1
    u = np.zeros((dim, dim), dtype=complex)
    idx = {m: m + j for m in range(-j, j + 1)}
    col = 0
    u[idx[0], col] = 1.0
    col += 1
    for m in range(1, j + 1):
        s = (-1) ** m
        u[idx[m], col] = s / sqrt(2.0)
        u[idx[-m], col] = 1.0 / sqrt(2.0)
        col += 1
        u[idx[m], col] = -1j * s / sqrt(2.0)
        u[idx[-m], col] = 1j / sqrt(2.0)
        col += 1
    return u


def _asym_top_block(j: int, bx: float, by: float, bz: float) -> np.ndarray:
    """Rigid-rotor Hamiltonian in the symmetric-top |j,k> basis (k = -j..j)."""
    dim = 2 * j + 1
    ks = np.arange(-j, j + 1)
    h = np.zeros((dim, dim))
    jj = j * (j + 1)
    h[np.diag_indices(dim)] = 0.5 * (bx + by) * (jj - ks**2) + bz * ks**2
    for i, k in enumerate(ks[:-2]):
        val = 0.25 * (bx - by) * sqrt((jj - k * (k + 1)) * (jj - (k + 1) * (k + 2)))
        h[i, i + 2] = val
        h[i + 2, i] = val
    return h


def _ka_kc_labels(j: int) -> list[tuple[int, int]]:
    # Standard prolate/oblate correlation: ascending energy within a j block.
    return [((p + 1) // 2, j - p // 2) for p in range(2 * j + 1)]


def _dipole_spherical(states: list[tuple[int, int, int]], mu: float) -> list[np.ndarray]:
    """Lab spherical components (sigma = -1, 0, +1) of the dipole operator.

    ``states`` lists (j, k, m) of the complex symmetric-top basis; the dipole
    points along the molecule-fixed z axis.
    """
    d = len(states)
    mats = [np.zeros((d, d)) for _ in range(3)]
    for col, (j, k, m) in enumerate(states):
        for row, (jp, kp, mp) in enumerate(states):
            kfac = clebsch_gordan(j, k, 1, 0, jp, kp)
            if kfac == 0.0:
                continue
            scale = mu * sqrt((2 * j + 1) / (2 * jp + 1)) * kfac
            for isig, sigma in enumerate((-1, 0, 1)):
                mfac = clebsch_gordan(j, m, 1, sigma, jp, mp)
                if mfac != 0.0:
                    mats[isig][row, col] = scale * mfac
    return mats


def _diagonal_flip_signs(flip_mats, keep_mats, dim: int, tol: float = 1e-12) -> np.ndarray:
    """Diagonal signs s with s_i s_j = -1 on flip couplings, +1 on keep couplings."""
    constraints: list[list[tuple[int, int]]] = [[] for _ in range(dim)]
    for mats, rel in ((flip_mats, -1), (keep_mats, +1)):
        for mat in mats:
            for i, j in zip(*np.nonzero(np.abs(mat) > tol)):
                if i != j:
                    constraints[i].append((int(j), rel))
                elif rel == -1:
                    raise ValueError("no diagonal sign flip exists (diagonal flip element)")
    signs = np.zeros(dim, dtype=int)
    for root in range(dim):
        if signs[root]:
            continue
        signs[root] = 1
        stack = [root]
        while stack:
            i = stack.pop()
            for j, rel in constraints[i]:
                want = rel * signs[i]
                if signs[j] == 0:
                    signs[j] = want
                    stack.append(j)
                elif signs[j] != want:
                    raise ValueError("sign constraints are inconsistent")
    return signs.astype(float)


def _finalize(kind, params, labels, energies, mu_cart, mu):
    dim = len(labels)
    h_rot = np.diag(np.asarray(energies, dtype=float))
    mu_x, mu_y, mu_z = mu_cart
    for name, mat in (("mu_x", mu_x), ("mu_y", mu_y), ("mu_z", mu_z)):
        herm = np.max(np.abs(mat - mat.T))
        if herm > _REAL_TOL:
            raise AssertionError(f"{name} not symmetric after realification: {herm:.2e}")
    signs = _diagonal_flip_signs([mu_z], [mu_x, mu_y], dim)
    z_flip = np.diag(signs)
    basis = SiteBasis(kind=kind, dim=dim, labels=tuple(labels), h_rot=h_rot,
                      mu_x=mu_x, mu_y=mu_y, mu_z=mu_z, mu=mu, z_flip=z_flip,
                      params=params)
    for arr in (basis.h_rot, basis.mu_x, basis.mu_y, basis.mu_z, basis.z_flip):
        arr.flags.writeable = False
    return basis


def _build_rotor(params: RotorParams):
    """Shared construction path; the linear rotor is the k=0-only special case."""
    j_max = params.j_max
    linear = params.kind == "linear"

    # Per-j diagonalization over k (trivial for the linear rotor).
    blocks = {}
    for j in range(j_max + 1):
        if linear:
            evals = np.array([params.b * j * (j + 1)])
            evecs = np.eye(1)
            klist = [0]
        else:
            h = _asym_top_block(j, bx=params.c_const, by=params.a_const,
                                bz=params.b_const)
            evals, evecs = np.linalg.eigh(h)
            for col in range(evecs.shape[1]):
                pivot = int(np.argmax(np.abs(evecs[:, col])))
                if evecs[pivot, col] < 0:
                    evecs[:, col] = -evecs[:, col]
            klist = list(range(-j, j + 1))
        blocks[j] = (evals, evecs, klist)

    # Retained (j, tau) states after the nuclear-spin filter. Each state
    # carries a phase grade: eigenvectors odd under k -> -k get a factor i,
    # which turns the within-j (purely imaginary) dipole blocks real.
    retained = []  # (j, tau, energy, label head, grade)
    for j in range(j_max + 1):
        evals, evecs, klist = blocks[j]
        if linear:
            retained.append((j, 0, evals[0], (j,), 0))
            continue
        kakc = _ka_kc_labels(j)
        kindex = {k: i for i, k in enumerate(klist)}
        for tau in range(2 * j + 1):
            ka, kc = kakc[tau]
            if params.spin_filter == "para" and (ka + kc) % 2 != 0:
                continue
            vec = evecs[:, tau]
            refl = sum(vec[kindex[k]] * vec[kindex[-k]] for k in klist)
            grade = 0 if refl > 0 else 1
            retained.append((j, tau, evals[tau], (j, ka, kc), grade))
    if not retained:
        raise ValueError("spin filter removed every basis state")

    # Complex |j,k,m> enumeration and the m-realification unitary.
    cstates = [(j, k, m)
               for j in range(j_max + 1)
               for k in ([0] if linear else range(-j, j + 1))
               for m in range(-j, j + 1)]
    cindex = {s: i for i, s in enumerate(cstates)}
    dim_full = len(cstates)

    u_real = np.zeros((dim_full, dim_full), dtype=complex)
    rstates = []  # (j, k, mtag)
    col = 0
    for j in range(j_max + 1):
        for k in ([0] if linear else range(-j, j + 1)):
            um = _m_real_unitary(j)
            tags = _m_tags(j)
            for tcol, tag in enumerate(tags):
                for mrow, m in enumerate(range(-j, j + 1)):
                    u_real[cindex[(j, k, m)], col] = um[mrow, tcol]
                rstates.append((j, k, tag))
                col += 1

    mu_sph = _dipole_spherical(cstates, params.mu)
    mu_minus, mu_zero, mu_plus = mu_sph
    cart = [
        (mu_minus - mu_plus) / sqrt(2.0),       # mu_x
        1j * (mu_minus + mu_plus) / sqrt(2.0),  # mu_y
        mu_zero.astype(complex),                # mu_z
    ]
    cart_m = [u_real.conj().T @ mat @ u_real for mat in cart]

    # Eigen-transform over (j,k) and slice the retained states.
    rindex = {s: i for i, s in enumerate(rstates)}
    labels = []
    energies = []
    col_vecs = []
    for j, tau, energy, head, grade in retained:
        _, evecs, klist = blocks[j]
        phase = 1j if grade else 1.0
        for tag in _m_tags(j):
            vec = np.zeros(dim_full, dtype=complex)
            for krow, k in enumerate(klist):
                vec[rindex[(j, k, tag)]] = phase * evecs[krow, tau]
            col_vecs.append(vec)
            labels.append(head + (tag,) if not linear else (j, tag))
            energies.append(energy)
    tmat = np.column_stack(col_vecs)
    mu_cart = []
    for mat in cart_m:
        m2 = tmat.conj().T @ mat @ tmat
        if np.max(np.abs(m2.imag)) > _REAL_TOL:
            raise AssertionError("realified dipole matrix has imaginary residue")
        mu_cart.append(m2.real)

    return _finalize(params.kind, params, labels, energies, mu_cart, params.mu)


def build_linear_rotor_basis(params: RotorParams) -> SiteBasis:
    """Spherical-harmonic basis |j,m> for j <= j_max, realified."""
    if params.kind != "linear":
        raise ValueError("params.kind must be 'linear'")
    return _build_rotor(params)


def build_water_basis(params: RotorParams) -> SiteBasis:
    """Para-filtered asymmetric-top eigenbasis with b-axis dipole."""
    if params.kind != "asymmetric-top":
        raise ValueError("params.kind must be 'asymmetric-top'")
    if params.spin_filter != "para":
        raise ValueError("the water basis uses spin_filter='para'")
    return _build_rotor(params)


def build_basis(params: RotorParams) -> SiteBasis:
    if params.kind == "linear":
        return build_linear_rotor_basis(params)
    return _build_rotor(params)


def wang_k_parity(params: RotorParams) -> list[tuple[tuple, int]]:
    """Brute-force Wang symmetry of every asymmetric-top state.

    Returns (label, parity) pairs where parity is the k-parity (0 even,
    1 odd) of the eigenvector's support in the |j,k> basis. A twofold
    rotation about the dipole axis multiplies |j,k> by (-1)^k, so parity 0
    marks states symmetric under exchange of the two identical nuclei.
    """
    out = []
    for j in range(params.j_max + 1):
        h = _asym_top_block(j, bx=params.c_const, by=params.a_const,
                            bz=params.b_const)
        _, evecs = np.linalg.eigh(h)
        ks = np.arange(-j, j + 1)
        kakc = _ka_kc_labels(j)
        for tau in range(2 * j + 1):
            vec = evecs[:, tau]
            even_w = float(np.sum(vec[ks % 2 == 0] ** 2))
            odd_w = float(np.sum(vec[ks % 2 == 1] ** 2))
            if min(even_w, odd_w) > 1e-10:
                raise AssertionError("eigenvector mixes even and odd k")
            out.append(((j,) + kakc[tau], 0 if even_w > odd_w else 1))
    return out


def basis_table(basis: SiteBasis) -> str:
    """Plain-text dump of labels, energies and dipole matrices."""
    lines = [f"site basis: kind={basis.kind} dim={basis.dim} mu={basis.mu:.9g} e*bohr",
             "",
             f"{'idx':>3}  {'label':<14} {'E (hartree)':>16} {'E (cm^-1)':>14}"]
    for i in range(basis.dim):
        e = basis.energies[i]
        lines.append(f"{i:>3}  {basis.label_text(i):<14} {e:>16.10e} "
                     f"{hartree_to_cm1(e):>14.6f}")
    for name, mat in (("mu_x", basis.mu_x), ("mu_y", basis.mu_y),
                      ("mu_z", basis.mu_z)):
        lines.append("")
        lines.append(f"{name} (e*bohr):")
        for row in mat:
            lines.append("  " + " ".join(f"{v: .10f}" for v in row))
    return "\n".join(lines) + "\n"
