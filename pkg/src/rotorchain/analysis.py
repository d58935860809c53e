"""Fit drivers: pull curves from a result store, run the criticality fits,
write FitResult JSON plus a human-readable report."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import SweepConfig
from .criticality import (AnalysisError, FitResult, central_charge_fit,
                          estimate_rc, eta_fit, fssa_collapse)
from .observables import nn_correlation_derivative
from .store import ResultStore

ANALYSES = ("collapse", "central-charge", "eta", "rc")


class MissingDataError(RuntimeError):
    """The store lacks points the requested analysis needs."""

    def __init__(self, missing: list):
        self.missing = missing
        listing = ", ".join(f"(N={n}, R={r:g}, {m})" for n, r, m in missing)
        super().__init__(f"store is missing {len(missing)} points: {listing}")


class FitConvergenceError(RuntimeError):
    """A required fit did not converge."""


def _require_complete(store: ResultStore, cfg: SweepConfig) -> None:
    done = {tuple(p) for p in store.completed_points(cfg.hash)}
    missing = []
    for n, r, eps in cfg.points():
        key = (n, format(float(r), ".17g"), cfg.mode_label(eps))
        if list(key) not in [list(d) for d in done]:
            missing.append((n, float(r), cfg.mode_label(eps)))
    if missing:
        raise MissingDataError(missing)


def _largest_run(cfg: SweepConfig) -> tuple[int, float]:
    n = max(cfg.sizes)
    if len(cfg.sweep_values) == 1:
        return n, cfg.sweep_values[0]
    return n, cfg.sweep_values[len(cfg.sweep_values) // 2]


def analyze(store: ResultStore, cfg: SweepConfig, which: str) -> FitResult:
    """Run one named analysis against the store; raises on missing data."""
    if which not in ANALYSES:
        raise ValueError(f"unknown analysis {which!r} (choose from {ANALYSES})")
    _require_complete(store, cfg)
    ana = cfg.analysis
    mode = cfg.mode_label(cfg.bond_weaken_eps[0] if cfg.mode == "bond-weaken" else 1.0)

    if which in ("collapse", "rc"):
        curves = store.load_curves(cfg.hash, mode, ana.collapse_quantity)
        if which == "collapse":
            fit = fssa_collapse(curves, init=ana.collapse_init,
                                n_bootstrap=ana.bootstrap_samples, seed=cfg.seed,
                                quantity=ana.collapse_quantity)
        else:
            fit = estimate_rc(curves, init=ana.collapse_init,
                              class_beta_over_nu=ana.class_beta_over_nu,
                              n_bootstrap=ana.bootstrap_samples, seed=cfg.seed)
    elif which == "central-charge":
        n, r = _largest_run(cfg)
        profile = store.load_entropy_profile(cfg.hash, n, r, mode)
        fit = central_charge_fit(profile, n, exclude_edges=ana.exclude_edge_bonds)
        fit.provenance.append(f"N={n} R={r:g} mode={mode}")
    else:  # eta
        n, r = _largest_run(cfg)
        m, corr = store.load_corr_profile(cfg.hash, n, r, mode)
        fit = eta_fit(corr, m, window=ana.eta_window)
        fit.provenance.append(f"N={n} R={r:g} m={m + 1} mode={mode}")
    if not fit.converged:
        raise FitConvergenceError(f"{which} fit did not converge: {fit.warnings}")
    return fit


def correlation_derivative_curve(store: ResultStore, cfg: SweepConfig,
                                 n: int | None = None):
    """(R, dC/dR) from the stored bond-averaged NN correlations."""
    mode = cfg.mode_label(cfg.bond_weaken_eps[0] if cfg.mode == "bond-weaken" else 1.0)
    n = n if n is not None else max(cfg.sizes)
    rs, c_nn = store.load_nn_correlation(cfg.hash, n, mode)
    return nn_correlation_derivative(rs, c_nn)


def write_fit(fit: FitResult, out_dir, name: str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jpath = out / f"fit_{name}.json"
    with open(jpath, "w") as fh:
        json.dump(fit.to_dict(), fh, indent=1, sort_keys=True)
    lines = [f"{name} fit ({fit.quantity})", "-" * 40]
    for key, val in fit.params.items():
        err = fit.errors.get(key, np.nan)
        lines.append(f"{key:>12} = {val:.6g} +- {err:.2g}")
    lines.append(f"{'residual':>12} = {fit.residual:.3e}")
    lines.append(f"{'points':>12} = {fit.n_points}")
    if fit.provenance:
        lines.append("data: " + "; ".join(fit.provenance))
    for w in fit.warnings:
        lines.append(f"warning: {w}")
    if fit.degenerate:
        lines.append("warning: fit flagged as degenerate")
    (out / f"report_{name}.txt").write_text("\n".join(lines) + "\n")
    return jpath
