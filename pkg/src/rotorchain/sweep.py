"""Sweep orchestration: run every (N, R, mode) grid point and persist records."""

from __future__ import annotations

import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from multiprocessing import get_context

import numpy as np

from . import ed
from .config import SweepConfig
from .dmrg import DmrgConfig, excited_states, ground_state
from .mps import MatrixProductState
from .observables import RunRecord, measure_state
from .store import ResultStore


def _point_seed(base_seed: int, n_idx: int, r_idx: int, eps_idx: int) -> int:
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(n_idx, r_idx, eps_idx))
    return int(ss.generate_state(1)[0])


def run_point(cfg: SweepConfig, n: int, value: float, eps: float, seed: int) -> RunRecord:
    """Solve one grid point with the configured engine and measure it."""
    spec = cfg.chain_spec(n, value, eps)
    mode = cfg.mode_label(eps)
    if cfg.engine == "ed":
        k = cfg.excited_states
        res = ed.dense_spectrum(spec, k=k + 1)
        vec = res.vectors[:, 0]
        d = spec.basis.dim
        e1 = res.energies[1] if k >= 1 and len(res.energies) > 1 else np.nan
        e2 = res.energies[2] if k >= 2 and len(res.energies) > 2 else np.nan
        rec = ed.measure_dense(vec, spec, mode=mode, e0=res.energies[0], e1=e1, e2=e2)
        rec.diagnostics = {"engine": "ed", "method": res.method,
                           "residual": float(res.residuals.max())}
        return rec

    from .model import build_mpo

    mpo = build_mpo(spec)
    dcfg = replace(cfg.dmrg, seed=seed)
    if cfg.excited_states > 0:
        levels, states = excited_states(mpo, dcfg, k=cfg.excited_states)
        psi = states[0]
        e0, e1, e2 = levels.e0, levels.e1, levels.e2
        diags = levels.diagnostics
    else:
        psi, e0, diag0 = ground_state(mpo, dcfg)
        e1 = e2 = np.nan
        diags = [diag0]
    rec = measure_state(psi, spec, mode=mode, engine="dmrg", e0=e0, e1=e1, e2=e2)
    rec.diagnostics = {
        "engine": "dmrg",
        "sweeps": [d.sweeps for d in diags],
        "converged": all(d.converged for d in diags),
        "max_discarded": max(d.max_discarded for d in diags),
        "warnings": sum((d.warnings for d in diags), []),
    }
    return rec


def _pool_task(args):
    cfg, n, value, eps, seed = args
    try:
        return (n, value, eps), run_point(cfg, n, value, eps, seed), None
    except Exception as exc:  # noqa: BLE001 - failed points must not kill the sweep
        return (n, value, eps), None, f"{exc}\n{traceback.format_exc()}"


def run_sweep(cfg: SweepConfig, out_dir=None, workers: int | None = None,
              log=print) -> ResultStore:
    """Execute all pending grid points of a sweep config.

    Completed points (tracked in the store manifest) are skipped, so
    re-running an identical config performs no recomputation. Failed
    points are recorded in the manifest and the sweep continues.
    """
    store = ResultStore(out_dir if out_dir is not None else cfg.output)
    store.register_config(cfg.hash, cfg.raw)
    workers = cfg.workers if workers is None else workers

    pending = []
    for n_idx, n in enumerate(cfg.sizes):
        for r_idx, value in enumerate(cfg.sweep_values):
            eps_list = cfg.bond_weaken_eps if cfg.mode == "bond-weaken" else [1.0]
            for eps_idx, eps in enumerate(eps_list):
                mode = cfg.mode_label(eps)
                if store.has_point(cfg.hash, n, value, mode):
                    continue
                seed = _point_seed(cfg.seed, n_idx, r_idx, eps_idx)
                pending.append((n, value, eps, seed))
    if not pending:
        log(f"[sweep {cfg.hash}] nothing to do ({len(cfg.points())} points already complete)")
        return store

    # Longest-expected-first keeps the tail short under parallel execution.
    # Records are committed in schedule order as they arrive (pool.map yields
    # in submission order), so the CSV files are byte-deterministic for a
    # given config and the store stays resumable after an interruption.
    pending.sort(key=lambda p: (-p[0], p[1], p[2]))
    log(f"[sweep {cfg.hash}] running {len(pending)} points "
        f"(mode={cfg.mode}, engine={cfg.engine}, workers={workers})")

    n_fail = 0

    def commit(key, rec, err):
        nonlocal n_fail
        n, v, eps = key
        if err is not None:
            n_fail += 1
            store.mark_failure(cfg.hash, n, v, cfg.mode_label(eps), err)
        else:
            store.append_record(cfg.hash, rec)
        log(f"  done N={n} value={v:g}" + (" FAILED" if err else ""))

    if workers > 1:
        os.environ.setdefault("OMP_NUM_THREADS", "1")
        tasks = [(cfg, n, v, eps, seed) for n, v, eps, seed in pending]
        with ProcessPoolExecutor(max_workers=workers,
                                 mp_context=get_context("spawn")) as pool:
            for key, rec, err in pool.map(_pool_task, tasks):
                commit(key, rec, err)
    else:
        for n, v, eps, seed in pending:
            commit(*_pool_task((cfg, n, v, eps, seed)))

    log(f"[sweep {cfg.hash}] finished: {len(pending) - n_fail} ok, {n_fail} failed")
    return store
