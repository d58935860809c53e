"""Both kernel backends against a brute-force einsum oracle and each other."""

import numpy as np
import pytest

import rotorchain.kernels as kernels

SHAPES = [
    # (Dl, d1, d2, Dr, wl, wm, wr)
    (3, 2, 2, 4, 1, 5, 3),
    (6, 4, 4, 5, 5, 5, 1),
    (7, 3, 2, 6, 4, 6, 5),
    (1, 2, 3, 1, 3, 4, 3),
]


def _random_mpo_block(rng, wa, wb, d):
    w = rng.normal(size=(wa, wb, d, d))
    mask = rng.random(size=(wa, wb)) < 0.4
    w[mask] = 0.0
    return w


@pytest.mark.parametrize("shape", SHAPES)
def test_heff2_against_einsum(rng, shape):
    dl, d1, d2, dr, wl, wm, wr = shape
    lenv = rng.normal(size=(wl, dl, dl))
    w1 = _random_mpo_block(rng, wl, wm, d1)
    w2 = _random_mpo_block(rng, wm, wr, d2)
    renv = rng.normal(size=(wr, dr, dr))
    theta = rng.normal(size=(dl, d1, d2, dr))
    want = np.einsum("abc,adef,dghi,gjk,cfik->behj", lenv, w1, w2, renv, theta)
    for name in kernels.available_backends():
        got = kernels.get_backend(name).apply_heff2(lenv, w1, w2, renv, theta)
        np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("shape", SHAPES)
def test_env_updates_against_einsum(rng, shape):
    dl, d1, _, dr, wl, _, wr = shape
    a = rng.normal(size=(dl, d1, dr))
    w = _random_mpo_block(rng, wl, wr, d1)
    lenv = rng.normal(size=(wl, dl, dl))
    renv = rng.normal(size=(wr, dr, dr))
    want_l = np.einsum("wbk,wvef,bez,kfg->vzg", lenv, w, a, a)
    want_r = np.einsum("vbk,wvef,zeb,gfk->wzg", renv, w, a, a)
    for name in kernels.available_backends():
        mod = kernels.get_backend(name)
        np.testing.assert_allclose(mod.update_left_env(lenv, w, a), want_l,
                                   atol=1e-12)
        np.testing.assert_allclose(mod.update_right_env(renv, w, a), want_r,
                                   atol=1e-12)


def test_backends_agree_closely(rng):
    if len(kernels.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    dl, d1, d2, dr, wl, wm, wr = 16, 4, 4, 12, 5, 5, 5
    lenv = rng.normal(size=(wl, dl, dl))
    w1 = _random_mpo_block(rng, wl, wm, d1)
    w2 = _random_mpo_block(rng, wm, wr, d2)
    renv = rng.normal(size=(wr, dr, dr))
    theta = rng.normal(size=(dl, d1, d2, dr))
    a = kernels.get_backend("compiled").apply_heff2(lenv, w1, w2, renv, theta)
    b = kernels.get_backend("numpy").apply_heff2(lenv, w1, w2, renv, theta)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_backend_selection_roundtrip():
    orig = kernels.backend_name()
    try:
        for name in kernels.available_backends():
            kernels.set_backend(name)
            assert kernels.backend_name() == name
        with pytest.raises(ValueError):
            kernels.set_backend("nonexistent")
    finally:
        kernels.set_backend(orig)
