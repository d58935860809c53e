"""Benchmark: compiled contraction kernels vs the pure-numpy fallback.

Times the raw kernels on DMRG-representative shapes and a short real
ground-state run with each backend. Run as:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import rotorchain.kernels as kernels
from rotorchain.dmrg import DmrgConfig, ground_state
from rotorchain.model import ChainSpec, build_mpo, tfim_chain
from rotorchain.sites import RotorParams, build_basis
from rotorchain.units import (WATER_A_CM1, WATER_B_CM1, WATER_C_CM1,
                              WATER_MU_DEBYE, cm1_to_hartree, debye_to_ebohr)

SHAPES = [
    # (chi, d, w) of a two-site effective-Hamiltonian application
    (16, 4, 5),
    (32, 4, 5),
    (64, 4, 5),
    (64, 4, 11),  # interaction range K=3
    (48, 2, 3),   # Ising chain
]


def _water_basis():
    return build_basis(RotorParams.asymmetric_top(
        a=cm1_to_hartree(WATER_A_CM1), b=cm1_to_hartree(WATER_B_CM1),
        c=cm1_to_hartree(WATER_C_CM1), mu=debye_to_ebohr(WATER_MU_DEBYE),
        j_max=1))


def _sparse_mpo_like(rng, w, d):
    """Zero pattern resembling a finite-state-machine MPO tensor."""
    mat = np.zeros((w, w, d, d))
    mat[0, 0] = np.eye(d)
    mat[-1, -1] = np.eye(d)
    mat[0, -1] = rng.normal(size=(d, d))
    for ch in range(1, w - 1):
        mat[0, ch] = rng.normal(size=(d, d))
        mat[ch, -1] = rng.normal(size=(d, d))
    return mat


def time_kernel(fn, args, repeat=200):
    fn(*args)  # warm up
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_raw_kernels():
    rng = np.random.default_rng(0)
    print(f"{'shape (chi,d,w)':>18} {'kernel':>18} {'numpy':>12} {'compiled':>12} {'speedup':>9}")
    for chi, d, w in SHAPES:
        lenv = rng.normal(size=(w, chi, chi))
        renv = rng.normal(size=(w, chi, chi))
        w1 = _sparse_mpo_like(rng, w, d)
        w2 = _sparse_mpo_like(rng, w, d)
        theta = rng.normal(size=(chi, d, d, chi))
        a = rng.normal(size=(chi, d, chi))
        cases = [
            ("apply_heff2", lambda m: (m.apply_heff2, (lenv, w1, w2, renv, theta))),
            ("update_left_env", lambda m: (m.update_left_env, (lenv, w1, a))),
        ]
        for name, make in cases:
            times = {}
            for backend in kernels.available_backends():
                fn, args = make(kernels.get_backend(backend))
                times[backend] = time_kernel(fn, args)
            if "compiled" in times:
                ratio = times["numpy"] / times["compiled"]
                print(f"{str((chi, d, w)):>18} {name:>18} "
                      f"{times['numpy'] * 1e6:>10.1f}us "
                      f"{times['compiled'] * 1e6:>10.1f}us {ratio:>8.2f}x")
            else:
                print(f"{str((chi, d, w)):>18} {name:>18} "
                      f"{times['numpy'] * 1e6:>10.1f}us {'n/a':>12} {'':>9}")


def bench_dmrg_runs():
    basis = _water_basis()
    runs = [
        ("rotor N=24 R=15", ChainSpec(n_sites=24, spacing=15.0, basis=basis)),
        ("tfim  N=48 g=1", tfim_chain(48, 1.0, 1.0)),
    ]
    print()
    print(f"{'ground-state run':>18} {'backend':>10} {'time':>9} {'energy':>22}")
    for label, spec in runs:
        mpo = build_mpo(spec)
        for backend in kernels.available_backends():
            kernels.set_backend(backend)
            cfg = DmrgConfig(chi_max=48, seed=1, tol_energy=1e-10)
            t0 = time.perf_counter()
            _, e0, diag = ground_state(mpo, cfg)
            dt = time.perf_counter() - t0
            print(f"{label:>18} {backend:>10} {dt:>8.2f}s {e0:>22.12e}")
    kernels.set_backend("compiled" if "compiled" in kernels.available_backends()
                        else "numpy")


if __name__ == "__main__":
    print(f"available backends: {kernels.available_backends()}")
    print(f"active backend: {kernels.backend_name()}")
    print()
    bench_raw_kernels()
    bench_dmrg_runs()
