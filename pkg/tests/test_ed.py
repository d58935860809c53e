import numpy as np
import pytest

from rotorchain.ed import (BudgetError, dense_spectrum, expectation_dense,
                           entanglement_entropy_dense, measure_dense,
                           reduced_density_spectrum)
from rotorchain.model import ChainSpec, dense_hamiltonian, tfim_chain


def test_single_site_limit(water_basis):
    # N=2 at huge spacing: spectrum is the sum of two site spectra
    spec = ChainSpec(n_sites=2, spacing=1e6, basis=water_basis)
    res = dense_spectrum(spec, k=4)
    site = np.sort(np.diag(water_basis.h_rot))
    np.testing.assert_allclose(res.energies[:2], [0.0, site[1]], atol=1e-12)


def test_tfim_n2_eigenvalues():
    res = dense_spectrum(tfim_chain(2, 1.0, 0.0), k=4)
    np.testing.assert_allclose(res.energies, [-1.0, -1.0, 1.0, 1.0], atol=1e-13)


def test_residuals_small(water_basis):
    spec = ChainSpec(n_sites=4, spacing=14.0, basis=water_basis)
    res = dense_spectrum(spec, k=3)
    assert res.residuals.max() < 1e-10


def test_lanczos_agrees_with_dense(water_basis):
    spec = ChainSpec(n_sites=5, spacing=14.0, basis=water_basis)
    dense = np.linalg.eigvalsh(dense_hamiltonian(spec))
    res = dense_spectrum(spec, k=3)
    assert res.method == "lanczos"
    np.testing.assert_allclose(res.energies, dense[:3], atol=1e-10)


def test_budget_error(water_basis):
    spec = ChainSpec(n_sites=12, spacing=14.0, basis=water_basis)
    with pytest.raises(BudgetError):
        dense_spectrum(spec, k=1)


def test_rdm_product_vector():
    vec = np.zeros(16)
    vec[0] = 1.0
    lam = reduced_density_spectrum(vec, 2, 4, 2)
    np.testing.assert_allclose(lam, [1.0, 0.0, 0.0, 0.0], atol=1e-14)


def test_rdm_bell_pair():
    vec = np.zeros(4)
    vec[0] = vec[3] = 1 / np.sqrt(2)
    lam = reduced_density_spectrum(vec, 2, 2, 1)
    np.testing.assert_allclose(lam, [0.5, 0.5], atol=1e-14)
    assert entanglement_entropy_dense(vec, 2, 2, 1) == pytest.approx(np.log(2))


def test_degeneracy_splitting_decreases_with_n(water_basis):
    # ordered phase: E1-E0 must shrink as the chain grows
    gaps = []
    for n in (4, 6, 8):
        spec = ChainSpec(n_sites=n, spacing=11.0, basis=water_basis)
        res = dense_spectrum(spec, k=2)
        gaps.append(res.energies[1] - res.energies[0])
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_degenerate_rotation_deterministic():
    res_a = dense_spectrum(tfim_chain(2, 1.0, 0.0), k=2)
    res_b = dense_spectrum(tfim_chain(2, 1.0, 0.0), k=2)
    np.testing.assert_array_equal(res_a.vectors, res_b.vectors)


def test_measure_dense_record(water_basis):
    spec = ChainSpec(n_sites=4, spacing=13.0, basis=water_basis)
    res = dense_spectrum(spec, k=1)
    rec = measure_dense(res.vectors[:, 0], spec, mode="full-symmetry",
                        e0=res.energies[0])
    assert rec.n_sites == 4
    assert len(rec.entropy_profile) == 3
    assert rec.schmidt_center[0] <= 1.0
    assert abs(rec.polarization) < 1e-8
    # inversion-symmetric: entropy profile symmetric
    np.testing.assert_allclose(rec.entropy_profile,
                               rec.entropy_profile[::-1], atol=1e-8)


def test_expectation_dense_product():
    up = np.array([1.0, 0.0])
    vec = np.kron(np.kron(up, up), up)
    sz = np.diag([1.0, -1.0])
    assert expectation_dense(vec, 2, 3, [(1, sz)]) == pytest.approx(1.0)
