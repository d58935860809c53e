import numpy as np
import pytest

from rotorchain.dmrg import (DmrgConfig, EnergyLevels, excited_states,
                             ground_state, mpo_expectation)
from rotorchain.ed import dense_spectrum
from rotorchain.model import ChainSpec, build_mpo, tfim_chain


def _rotor_spec(basis, n, r, **kw):
    return ChainSpec(n_sites=n, spacing=r, basis=basis, **kw)


def test_config_validation():
    with pytest.raises(ValueError):
        DmrgConfig(tol_energy=0.0)
    with pytest.raises(ValueError):
        DmrgConfig(max_sweeps=1)
    with pytest.raises(ValueError):
        DmrgConfig(penalty_weight=-1.0)
    with pytest.raises(ValueError):
        DmrgConfig(init="bogus")


def test_ground_state_n2_exact(water_basis):
    spec = _rotor_spec(water_basis, 2, 14.0)
    exact = dense_spectrum(spec, k=1)
    psi, e0, diag = ground_state(build_mpo(spec), DmrgConfig(chi_max=16, seed=1))
    assert abs(e0 - exact.energies[0]) < 1e-10
    assert diag.converged
    assert psi.norm() == pytest.approx(1.0, abs=1e-10)


def test_decoupled_limit(water_basis):
    # interaction far below tolerance: product of site ground states
    spec = _rotor_spec(water_basis, 6, 2000.0)
    psi, e0, diag = ground_state(build_mpo(spec), DmrgConfig(chi_max=16, seed=1))
    assert abs(e0 - 0.0) < 1e-12  # site ground energies are zero
    from rotorchain.observables import entanglement_entropy

    assert entanglement_entropy(psi, 3) < 1e-6


def test_tfim_n12_matches_ed():
    spec = tfim_chain(12, 1.0, 1.0)
    exact = dense_spectrum(spec, k=1)
    psi, e0, diag = ground_state(
        build_mpo(spec),
        DmrgConfig(chi_max=64, cutoff=1e-14, seed=2, tol_energy=1e-12))
    assert abs(e0 - exact.energies[0]) < 1e-9


def test_monotone_energy_history(water_basis):
    spec = _rotor_spec(water_basis, 8, 15.0)
    _, _, diag = ground_state(build_mpo(spec), DmrgConfig(chi_max=32, seed=3))
    hist = diag.energy_history
    for a, b in zip(hist, hist[1:]):
        assert b <= a + 1e-10


def test_variational_bound(water_basis):
    for r in (13.0, 15.0, 17.0):
        spec = _rotor_spec(water_basis, 6, r)
        exact = dense_spectrum(spec, k=1)
        _, e0, _ = ground_state(build_mpo(spec), DmrgConfig(chi_max=32, seed=4))
        assert e0 >= exact.energies[0] - 1e-9


def test_determinism(water_basis):
    spec = _rotor_spec(water_basis, 8, 15.0)
    mpo = build_mpo(spec)
    cfg = DmrgConfig(chi_max=24, seed=7, noise_amplitude=1e-3)
    psi_a, e_a, _ = ground_state(mpo, cfg)
    psi_b, e_b, _ = ground_state(mpo, cfg)
    assert abs(e_a - e_b) < 1e-12
    lam_a = psi_a.schmidt_spectrum(4).values
    lam_b = psi_b.schmidt_spectrum(4).values
    np.testing.assert_allclose(lam_a, lam_b, atol=1e-10)


def test_excited_states_n2(water_basis):
    spec = _rotor_spec(water_basis, 2, 14.0)
    exact = dense_spectrum(spec, k=3)
    levels, states = excited_states(build_mpo(spec),
                                    DmrgConfig(chi_max=16, seed=5), k=2)
    assert abs(levels.e0 - exact.energies[0]) < 1e-8
    assert abs(levels.e1 - exact.energies[1]) < 1e-8
    assert abs(levels.e2 - exact.energies[2]) < 1e-8
    assert levels.e0 <= levels.e1 <= levels.e2
    assert max(levels.overlaps) < 1e-6


def test_excited_states_tfim_gap():
    # Dominant-field regime: gap approaches 2(g-J) with O(1/N) corrections.
    n, g = 16, 1.5
    spec = tfim_chain(n, 1.0, g)
    exact = dense_spectrum(spec, k=2)
    levels, _ = excited_states(build_mpo(spec),
                               DmrgConfig(chi_max=32, seed=6, tol_energy=1e-11), k=1)
    exact_gap = exact.energies[1] - exact.energies[0]
    assert abs(levels.gap1 - exact_gap) < 1e-7
    assert abs(levels.gap1 - 2 * (g - 1.0)) < 0.5


def test_mpo_expectation_consistency(water_basis):
    spec = _rotor_spec(water_basis, 4, 13.0)
    mpo = build_mpo(spec)
    psi, e0, _ = ground_state(mpo, DmrgConfig(chi_max=32, seed=8))
    assert mpo_expectation(mpo, psi) == pytest.approx(e0, abs=1e-12)


def test_checkpoint_resume(tmp_path, water_basis):
    spec = _rotor_spec(water_basis, 6, 15.0)
    mpo = build_mpo(spec)
    path = str(tmp_path / "ground.mps")
    cfg = DmrgConfig(chi_max=24, seed=9, checkpoint_path=path)
    _, e_first, _ = ground_state(mpo, cfg)
    cfg2 = DmrgConfig(chi_max=24, seed=9, checkpoint_path=path, resume=True,
                      max_sweeps=3)
    _, e_resumed, diag = ground_state(mpo, cfg2)
    assert abs(e_first - e_resumed) < 1e-10
    assert diag.sweeps <= 3


def test_chi_cap_respected(water_basis):
    spec = _rotor_spec(water_basis, 8, 14.5)
    psi, _, _ = ground_state(build_mpo(spec), DmrgConfig(chi_max=12, seed=10))
    assert max(psi.bond_dims) <= 12


def test_gap_ordering_invariant():
    levels = EnergyLevels(e0=-1.0, e1=-0.5, e2=0.25)
    assert levels.gap1 == pytest.approx(0.5)
    assert levels.gap2 == pytest.approx(1.25)
