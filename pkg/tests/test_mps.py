import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotorchain.mps import (MatrixProductState, load_mps, overlap, save_mps,
                            split_two_site, truncation_rank)


def random_mps(rng, dims, chi=6):
    return MatrixProductState.random(dims, chi=chi, rng=rng, chi_max=64)


def test_product_state_properties():
    psi = MatrixProductState.product_state([np.array([1.0, 0.0])] * 5)
    assert psi.bond_dims == [1, 1, 1, 1]
    assert psi.norm() == pytest.approx(1.0, abs=1e-14)
    for bond in range(1, 5):
        spec = psi.schmidt_spectrum(bond)
        np.testing.assert_allclose(spec.values, [1.0])
        assert spec.entropy() == pytest.approx(0.0, abs=1e-14)
        assert spec.gap() == pytest.approx(1.0)


def test_two_site_cat_state():
    # (|ab> + |ba>)/sqrt(2) has Schmidt spectrum {1/2, 1/2}.
    theta = np.zeros((1, 2, 2, 1))
    theta[0, 0, 1, 0] = theta[0, 1, 0, 0] = 1 / np.sqrt(2)
    a, s, b, disc = split_two_site(theta, chi_max=4, cutoff=0.0)
    np.testing.assert_allclose(s**2, [0.5, 0.5], atol=1e-14)
    assert disc == pytest.approx(0.0, abs=1e-14)


def test_canonicalize_preserves_state(rng):
    dims = [3, 2, 4, 2, 3]
    psi = random_mps(rng, dims)
    dense = psi.to_dense()
    dense /= np.linalg.norm(dense)
    for center in (0, 2, len(dims) - 1):
        psi.canonicalize(center)
        np.testing.assert_allclose(np.abs(psi.to_dense() @ dense), 1.0, atol=1e-10)
        _assert_isometries(psi, center)


def _assert_isometries(psi, center):
    for i, t in enumerate(psi.tensors):
        dl, d, dr = t.shape
        if i < center:
            m = t.reshape(dl * d, dr)
            np.testing.assert_allclose(m.T @ m, np.eye(dr), atol=1e-10)
        elif i > center:
            m = t.reshape(dl, d * dr)
            np.testing.assert_allclose(m @ m.T, np.eye(dl), atol=1e-10)


def test_canonicalize_idempotent(rng):
    psi = random_mps(rng, [2, 3, 2, 3])
    psi.canonicalize(1)
    before = [t.copy() for t in psi.tensors]
    psi.canonicalize(1)
    for a, b in zip(before, psi.tensors):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_schmidt_matches_dense_rdm(rng):
    from rotorchain.ed import reduced_density_spectrum

    dims = [3, 3, 3, 3]
    psi = random_mps(rng, dims)
    psi.canonicalize(0)
    dense = psi.to_dense()
    for bond in (1, 2, 3):
        lam = psi.schmidt_spectrum(bond).values
        lam_dense = reduced_density_spectrum(dense, 3, 4, bond)
        k = min(len(lam), len(lam_dense))
        np.testing.assert_allclose(lam[:k], lam_dense[:k], atol=1e-10)
        assert lam.sum() == pytest.approx(1.0, abs=1e-10)


def test_expectation_against_dense(rng):
    dims = [2, 2, 2, 2, 2, 2]
    psi = random_mps(rng, dims)
    psi.canonicalize(0)
    dense = psi.to_dense()
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    # identity
    assert psi.expectation([]) == pytest.approx(1.0, abs=1e-12)
    # one site
    from rotorchain.ed import expectation_dense

    for i in (0, 3, 5):
        want = expectation_dense(dense, 2, 6, [(i, sz)])
        assert psi.expectation_one(i, sz) == pytest.approx(want, abs=1e-11)
    # two sites
    want = expectation_dense(dense, 2, 6, [(1, sz), (4, sz)])
    assert psi.expectation_two(1, sz, 4, sz) == pytest.approx(want, abs=1e-11)
    want = expectation_dense(dense, 2, 6, [(2, sx), (3, sz)])
    assert psi.expectation_two(2, sx, 3, sz) == pytest.approx(want, abs=1e-11)


def test_expectation_product_state():
    up = np.array([1.0, 0.0])
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    psi = MatrixProductState.product_state([up, plus, up])
    sz = np.diag([1.0, -1.0])
    assert psi.expectation_one(0, sz) == pytest.approx(1.0)
    assert psi.expectation_one(1, sz) == pytest.approx(0.0, abs=1e-14)


def test_expectation_errors(rng):
    psi = random_mps(rng, [2, 2])
    sz = np.diag([1.0, -1.0])
    with pytest.raises(IndexError):
        psi.expectation_one(5, sz)
    with pytest.raises(ValueError):
        psi.expectation([(0, sz), (0, sz)])


def test_truncation_rank_cutoff():
    s = np.array([0.9, 0.4, 0.15, 0.05, 0.01])
    s = s / np.linalg.norm(s)
    # keep everything at zero cutoff
    assert truncation_rank(s, chi_max=10, cutoff=0.0) == 5
    # a loose cutoff truncates the tail
    k = truncation_rank(s, chi_max=10, cutoff=1e-3)
    assert k < 5
    assert np.sum(s[k:] ** 2) <= 1e-3
    # chi cap wins
    assert truncation_rank(s, chi_max=2, cutoff=0.0) == 2


def test_truncation_never_splits_degenerate_pairs():
    lam = np.array([0.5, 0.3, 0.1, 0.1, 1e-7, 1e-7])
    s = np.sqrt(lam / lam.sum())
    # cutoff falls inside the degenerate 1e-7 pair: keep both
    k = truncation_rank(s, chi_max=10, cutoff=1.2e-7)
    assert k in (4, 6)
    # chi cap inside the 0.1-pair: shrink to keep the block whole
    k = truncation_rank(s, chi_max=3, cutoff=0.0)
    assert k == 2


def test_split_discarded_weight_accounting(rng):
    theta = rng.normal(size=(4, 3, 3, 4))
    theta /= np.linalg.norm(theta)
    a, s, b, disc = split_two_site(theta, chi_max=5, cutoff=1e-3)
    # the returned split is renormalized; the overlap with the input state
    # accounts exactly for the discarded weight
    recon = np.einsum("abk,k,kcd->abcd", a, s, b)
    kept_overlap = float(np.tensordot(recon, theta, axes=4))
    assert (recon**2).sum() == pytest.approx(1.0, abs=1e-12)
    assert kept_overlap**2 == pytest.approx(1.0 - disc, abs=1e-10)


def test_checkpoint_roundtrip_bit_exact(tmp_path, rng):
    psi = random_mps(rng, [3, 4, 2, 4])
    psi.canonicalize(2)
    path = tmp_path / "state.mps"
    save_mps(path, psi)
    back = load_mps(path)
    assert back.n_sites == psi.n_sites
    assert back.center == psi.center
    assert back.chi_max == psi.chi_max
    assert back.cutoff == psi.cutoff
    for a, b in zip(psi.tensors, back.tensors):
        assert a.shape == b.shape
        assert np.array_equal(a, b)
    # and the file itself is stable under a second save
    save_mps(tmp_path / "again.mps", back)
    assert (tmp_path / "state.mps").read_bytes() == (tmp_path / "again.mps").read_bytes()


def test_checkpoint_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.mps"
    bad.write_bytes(b"not a checkpoint")
    with pytest.raises(ValueError):
        load_mps(bad)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 6), center=st.integers(0, 5))
def test_canonicalization_properties(seed, n, center):
    center = min(center, n - 1)
    rng = np.random.default_rng(seed)
    dims = [int(rng.integers(2, 4)) for _ in range(n)]
    psi = MatrixProductState.random(dims, chi=5, rng=rng)
    psi.canonicalize(center)
    assert psi.norm() == pytest.approx(1.0, abs=1e-10)
    _assert_isometries(psi, center)
    assert all(d <= psi.chi_max for d in psi.bond_dims)


def test_overlap_mismatched_lengths(rng):
    a = random_mps(rng, [2, 2])
    b = random_mps(rng, [2, 2, 2])
    with pytest.raises(ValueError):
        overlap(a, b)
