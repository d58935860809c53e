import numpy as np
import pytest

from rotorchain.model import (ChainSpec, Mpo, ModelSizeError, build_mpo,
                              chain_terms, dense_hamiltonian,
                              dipole_dipole_coupling, global_z_flip,
                              spin_half_basis, ssd_weight, tfim_chain, tfim_mpo)


def test_chainspec_validation(water_basis):
    with pytest.raises(ValueError):
        ChainSpec(n_sites=1, spacing=10.0, basis=water_basis)
    with pytest.raises(ValueError):
        ChainSpec(n_sites=4, spacing=-1.0, basis=water_basis)
    with pytest.raises(ValueError):
        ChainSpec(n_sites=4, spacing=10.0, basis=water_basis, interaction_range=4)
    with pytest.raises(ValueError):
        ChainSpec(n_sites=4, spacing=10.0, basis=water_basis, bond_weaken=1.5)
    with pytest.raises(ValueError):
        ChainSpec(n_sites=4, spacing=10.0, basis=water_basis, ssd=True,
                  bond_weaken=0.5)


def test_coupling_classical_head_to_tail(water_basis):
    # Two classical dipoles aligned along the chain axis: V = -2 mu^2 / r^3.
    mu = water_basis.mu
    r = 2.0
    channels = dipole_dipole_coupling(water_basis, r)
    vec = np.array([0.0, 0.0, mu])
    energy = sum(coeff * vec[i] ** 2 for i, (_, _, coeff) in enumerate(channels))
    assert energy == pytest.approx(-2 * mu**2 / r**3, rel=1e-14)


def test_coupling_inverse_cube(water_basis):
    c1 = [c for *_, c in dipole_dipole_coupling(water_basis, 1.0)]
    c2 = [c for *_, c in dipole_dipole_coupling(water_basis, 2.0)]
    np.testing.assert_allclose(np.array(c2), np.array(c1) / 8.0, rtol=1e-14)


def test_coupling_ground_matrix_element_vanishes(linear_basis):
    # Parity forbids <00,00|V|00,00>.
    spec = ChainSpec(n_sites=2, spacing=3.0, basis=linear_basis)
    h = dense_hamiltonian(spec)
    assert h[0, 0] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("n,k", [(2, 1), (4, 1), (4, 3), (5, 2), (6, 3)])
def test_mpo_matches_dense(water_basis, n, k):
    spec = ChainSpec(n_sites=n, spacing=12.0, basis=water_basis,
                     interaction_range=k)
    hd = dense_hamiltonian(spec)
    hm = build_mpo(spec).to_dense()
    assert np.max(np.abs(hd - hm)) < 1e-12
    assert np.max(np.abs(hd - hd.T)) < 1e-12


def test_mpo_matches_dense_with_modifiers(water_basis):
    for kwargs in (dict(edge_field=(1e-7, 0, 1e-7)), dict(ssd=True),
                   dict(bond_weaken=0.25)):
        spec = ChainSpec(n_sites=5, spacing=14.0, basis=water_basis, **kwargs)
        hd = dense_hamiltonian(spec)
        hm = build_mpo(spec).to_dense()
        assert np.max(np.abs(hd - hm)) < 1e-12


def test_mpo_bond_dimension(water_basis):
    for k in (1, 2, 3):
        spec = ChainSpec(n_sites=6, spacing=12.0, basis=water_basis,
                         interaction_range=k)
        mpo = build_mpo(spec)
        assert max(mpo.bond_dims) == 2 + 3 * k


def test_parity_symmetry(water_basis):
    spec = ChainSpec(n_sites=4, spacing=12.0, basis=water_basis)
    h = dense_hamiltonian(spec)
    p = global_z_flip(spec)
    assert np.max(np.abs(h @ p - p @ h)) < 1e-12
    spec_f = spec.with_(edge_field=(0.0, 0.0, 1e-5))
    hf = dense_hamiltonian(spec_f)
    assert np.max(np.abs(hf @ p - p @ hf)) > 1e-7


def test_ssd_envelope_n2(water_basis):
    # N=2: site terms at x=1/2, 3/2 carry sin^2(pi/4) = 1/2; the single bond
    # at x=1 carries sin^2(pi/2) = 1.
    spec = ChainSpec(n_sites=2, spacing=10.0, basis=water_basis, ssd=True)
    plain = ChainSpec(n_sites=2, spacing=10.0, basis=water_basis)
    st, bt = chain_terms(spec)
    st0, bt0 = chain_terms(plain)
    for (i, op), (_, op0) in zip(st, st0):
        np.testing.assert_allclose(op, 0.5 * op0, atol=1e-15)
    for (i, j, a, b, c), (_, _, _, _, c0) in zip(bt, bt0):
        assert c == pytest.approx(c0, rel=1e-14)
    hd = dense_hamiltonian(spec)
    hm = build_mpo(spec).to_dense()
    assert np.max(np.abs(hd - hm)) < 1e-15


def test_ssd_boundary_weights():
    n = 24
    sites = [ssd_weight(i - 0.5, n) for i in range(1, n + 1)]
    bonds = [ssd_weight(i, n) for i in range(1, n)]
    assert sites[0] < max(sites) and sites[-1] < max(sites)
    assert bonds[0] < max(bonds) and bonds[-1] < max(bonds)
    assert max(bonds) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(sites, sites[::-1], atol=1e-12)
    np.testing.assert_allclose(bonds, bonds[::-1], atol=1e-12)


def test_weakened_bond_decouples_at_zero(water_basis):
    from rotorchain.ed import dense_spectrum

    spec = ChainSpec(n_sites=4, spacing=12.0, basis=water_basis, bond_weaken=0.0)
    half = ChainSpec(n_sites=2, spacing=12.0, basis=water_basis)
    e_full = dense_spectrum(spec, k=1).energies[0]
    e_half = dense_spectrum(half, k=1).energies[0]
    assert e_full == pytest.approx(2 * e_half, abs=1e-12)


def test_tfim_n2_classical():
    evals = np.linalg.eigvalsh(tfim_mpo(2, 1.0, 0.0).to_dense())
    np.testing.assert_allclose(evals, [-1.0, -1.0, 1.0, 1.0], atol=1e-14)


def test_tfim_n2_mixed():
    e0 = np.linalg.eigvalsh(tfim_mpo(2, 1.0, 1.0).to_dense())[0]
    assert e0 == pytest.approx(-np.sqrt(5.0), abs=1e-13)


def test_tfim_strong_field_limit():
    n, g = 6, 50.0
    e0 = np.linalg.eigvalsh(tfim_mpo(n, 1.0, g).to_dense())[0]
    assert e0 < -g * n
    assert abs(e0 + g * n) < n  # O(1) interaction correction


def test_tfim_mpo_bond_dimension():
    assert max(tfim_mpo(6).bond_dims) == 3


def test_tfim_matches_dense():
    spec = tfim_chain(5, 1.3, 0.7)
    assert np.max(np.abs(dense_hamiltonian(spec)
                         - build_mpo(spec).to_dense())) < 1e-12


def test_mpo_memory_budget(water_basis):
    spec = ChainSpec(n_sites=200, spacing=12.0, basis=water_basis,
                     interaction_range=150)
    with pytest.raises(ModelSizeError):
        build_mpo(spec, budget_mb=1.0)


def test_spin_half_flip():
    b = spin_half_basis()
    assert np.max(np.abs(b.z_flip @ b.mu_z @ b.z_flip + b.mu_z)) < 1e-15
    assert np.max(np.abs(b.z_flip @ b.mu_x @ b.z_flip - b.mu_x)) < 1e-15
