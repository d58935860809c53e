"""Command-line interface.

Exit codes: 0 success, 1 nothing to do, 2 configuration or input error,
3 convergence failure in a required fit or oracle check.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import ANALYSES, FitConvergenceError, MissingDataError, analyze, write_fit
from .config import ConfigError, load_config
from .criticality import AnalysisError
from .plots import emit_plots
from .sites import basis_table
from .store import ResultStore
from .sweep import run_point, run_sweep

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


def _add_common(p):
    p.add_argument("--config", required=True, help="sweep config (YAML)")
    p.add_argument("--out", default=None, help="override the output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotorchain",
        description="Dipolar rotor chains: DMRG sweeps, criticality fits, figures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run all grid points of a config")
    _add_common(p)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("analyze", help="run fits against a completed sweep")
    _add_common(p)
    p.add_argument("--which", choices=ANALYSES + ("all",), default="all")

    p = sub.add_parser("plot", help="emit figure data files and plot scripts")
    p.add_argument("--store", required=True, help="result store directory")
    p.add_argument("--out", default=None, help="figure output directory")

    p = sub.add_parser("oracle", help="cross-check DMRG against exact diagonalization")
    _add_common(p)
    p.add_argument("--max-sites", type=int, default=8)

    p = sub.add_parser("basis", help="dump the single-site basis")
    _add_common(p)
    return parser


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        from .config import parse_config

        raw = dict(cfg.raw)
        raw["seed"] = args.seed
        cfg = parse_config(raw)
    run_sweep(cfg, out_dir=args.out, workers=args.workers)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    store = ResultStore(args.out if args.out else cfg.output)
    which = list(ANALYSES) if args.which == "all" else [args.which]
    rc = EXIT_OK
    for name in which:
        try:
            fit = analyze(store, cfg, name)
        except MissingDataError as exc:
            print(f"analyze {name}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (AnalysisError, KeyError) as exc:
            print(f"analyze {name}: {exc}", file=sys.stderr)
            if args.which != "all":
                return EXIT_CONFIG
            continue
        except FitConvergenceError as exc:
            print(f"analyze {name}: {exc}", file=sys.stderr)
            rc = EXIT_CONVERGENCE
            continue
        path = write_fit(fit, store.path, name)
        summary = ", ".join(f"{k}={v:.5g}" for k, v in fit.params.items())
        print(f"{name}: {summary} -> {path}")
    return rc


def _cmd_plot(args) -> int:
    store_dir = Path(args.store)
    if not (store_dir / "manifest.json").exists():
        print("nothing to plot: store is empty or missing", file=sys.stderr)
        return EXIT_EMPTY
    store = ResultStore(store_dir)
    emitted = emit_plots(store, args.out if args.out else store_dir / "figures")
    if not emitted:
        print("nothing to plot: no usable curves in the store", file=sys.stderr)
        return EXIT_EMPTY
    for name in emitted:
        print(f"wrote {name}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    sizes = [n for n in cfg.sizes if n <= args.max_sites]
    if not sizes:
        print(f"no grid sizes <= {args.max_sites} to cross-check", file=sys.stderr)
        return EXIT_CONFIG
    tol_e, tol_obs = 1e-8, 1e-6
    worst_e = worst_obs = 0.0
    print(f"{'N':>4} {'value':>10} {'dE0':>10} {'dSvN':>10} {'dSchmidt':>10} "
          f"{'dCzz':>10} {'dp':>10}")
    for n in sizes:
        for r in cfg.sweep_values:
            rec_ed = run_point(_with_engine(cfg, "ed"), n, r, 1.0, cfg.seed)
            rec_dm = run_point(_with_engine(cfg, "dmrg"), n, r, 1.0, cfg.seed)
            de = abs(rec_ed.e0 - rec_dm.e0)
            ds = float(np.max(np.abs(rec_ed.entropy_profile - rec_dm.entropy_profile)))
            k = min(10, len(rec_ed.schmidt_center), len(rec_dm.schmidt_center))
            dl = float(np.max(np.abs(rec_ed.schmidt_center[:k] - rec_dm.schmidt_center[:k])))
            dc = float(np.max(np.abs(rec_ed.corr_profile - rec_dm.corr_profile)))
            dp = abs(rec_ed.polarization - rec_dm.polarization)
            print(f"{n:>4} {r:>10.4g} {de:>10.2e} {ds:>10.2e} {dl:>10.2e} "
                  f"{dc:>10.2e} {dp:>10.2e}")
            worst_e = max(worst_e, de)
            worst_obs = max(worst_obs, ds, dl, dc, dp)
    ok = worst_e < tol_e and worst_obs < tol_obs
    print(f"worst energy deviation {worst_e:.2e} (tol {tol_e:g}), "
          f"worst observable deviation {worst_obs:.2e} (tol {tol_obs:g}): "
          + ("OK" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_CONVERGENCE


def _with_engine(cfg, engine):
    import copy

    out = copy.copy(cfg)
    out.engine = engine
    return out


def _cmd_basis(args) -> int:
    cfg = load_config(args.config)
    text = basis_table(cfg.basis)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        handler = {
            "sweep": _cmd_sweep,
            "analyze": _cmd_analyze,
            "plot": _cmd_plot,
            "oracle": _cmd_oracle,
            "basis": _cmd_basis,
        }[args.command]
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
