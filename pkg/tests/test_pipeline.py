"""Configuration, result store, sweep orchestration, CLI and figure emission."""

import copy
import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from rotorchain.analysis import MissingDataError, analyze, write_fit
from rotorchain.cli import main
from rotorchain.config import ConfigError, config_hash, load_config, parse_config
from rotorchain.store import CSV_SCHEMAS, ResultStore, fmt
from rotorchain.sweep import run_sweep

BASE_CFG = {
    "model": "water",
    "basis": {"j_max": 1},
    "grid": {"sizes": [4, 6], "spacings_bohr": [13.0, 15.0, 17.0],
             "interaction_range": 1},
    "mode": "full-symmetry",
    "engine": "ed",
    "dmrg": {"chi_max": 32, "excited_states": 2},
    "seed": 3,
}


def make_cfg(tmp_path, **overrides):
    raw = copy.deepcopy(BASE_CFG)
    raw.update(overrides)
    raw.setdefault("output", str(tmp_path / "store"))
    return parse_config(raw)


def write_cfg_file(tmp_path, name="cfg.yaml", **overrides):
    raw = copy.deepcopy(BASE_CFG)
    raw.update(overrides)
    raw.setdefault("output", str(tmp_path / "store"))
    path = tmp_path / name
    with open(path, "w") as fh:
        yaml.safe_dump(raw, fh)
    return path


# -- config -------------------------------------------------------------

def test_config_parses_and_hashes(tmp_path):
    cfg = make_cfg(tmp_path)
    assert cfg.model == "water"
    assert cfg.basis.dim == 4
    assert len(cfg.points()) == 6
    assert len(cfg.hash) == 12


def test_config_hash_stability():
    raw_a = {"b": 2, "a": 1}
    raw_b = {"a": 1, "b": 2}
    assert config_hash(raw_a) == config_hash(raw_b)
    assert config_hash({"a": 1, "b": 3}) != config_hash(raw_a)


def test_config_rejects_bad_input(tmp_path):
    with pytest.raises(ConfigError):
        make_cfg(tmp_path, model="bogus")
    with pytest.raises(ConfigError):
        make_cfg(tmp_path, mode="bogus")
    with pytest.raises(ConfigError):
        make_cfg(tmp_path, grid={"sizes": [4], "spacings_bohr": []})
    with pytest.raises(ConfigError):
        make_cfg(tmp_path, grid={"sizes": [4], "spacings_bohr": [12.0, 12.0]})
    with pytest.raises(ConfigError):
        make_cfg(tmp_path, engine="quantum")
    with pytest.raises(ConfigError):
        make_cfg(tmp_path, grid={"sizes": [4], "spacings_bohr": [12.0],
                                 "interaction_range": 5})


def test_config_tfim(tmp_path):
    cfg = make_cfg(tmp_path, model="tfim",
                   grid={"sizes": [8], "transverse_fields": [0.9, 1.0, 1.1]})
    assert cfg.basis.dim == 2
    spec = cfg.chain_spec(8, 1.0)
    assert spec.model == "tfim"


def test_config_unit_conversion(tmp_path):
    cfg = make_cfg(tmp_path)
    gap = cfg.basis.energies[1] - cfg.basis.energies[0]
    assert gap == pytest.approx(37.162 / 219474.6313632, rel=1e-9)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")


# -- store ---------------------------------------------------------------

def test_store_headers_and_roundtrip(tmp_path):
    store = ResultStore(tmp_path / "s")
    for name, header in CSV_SCHEMAS.items():
        first = (tmp_path / "s" / name).read_text().splitlines()[0]
        assert first == header
    x = 0.1 + 0.2  # classic non-representable value
    assert float(fmt(x)) == x
    assert float(fmt(1e-300)) == 1e-300


def test_sweep_populates_store(tmp_path):
    cfg = make_cfg(tmp_path)
    store = run_sweep(cfg, log=lambda *_: None)
    assert len(store.completed_points(cfg.hash)) == 6
    gaps = (store.path / "gaps.csv").read_text().splitlines()
    assert len(gaps) == 7  # header + one row per point
    schmidt = (store.path / "schmidt.csv").read_text().splitlines()
    assert len(schmidt) > 7
    # idempotency: no recomputation, identical files
    before = {f.name: f.read_bytes() for f in store.path.glob("*.csv")}
    run_sweep(cfg, log=lambda *_: None)
    after = {f.name: f.read_bytes() for f in store.path.glob("*.csv")}
    assert before == after


def test_store_loaders(tmp_path):
    cfg = make_cfg(tmp_path)
    store = run_sweep(cfg, log=lambda *_: None)
    curves = store.load_curves(cfg.hash, "full-symmetry", "schmidt-gap")
    assert set(curves) == {4, 6}
    r, v = curves[6]
    assert len(r) == 3 and np.all(np.diff(r) > 0)
    prof = store.load_entropy_profile(cfg.hash, 6, 15.0, "full-symmetry")
    assert len(prof) == 5
    m, corr = store.load_corr_profile(cfg.hash, 6, 15.0, "full-symmetry")
    assert len(corr) == 6 and m == 2
    lam = store.load_schmidt_values(cfg.hash, 4, 13.0, "full-symmetry")
    assert lam[0] >= lam[-1] > 0
    row = store.load_gap_row(cfg.hash, 4, 13.0, "full-symmetry")
    assert row["gap1"] >= 0
    rs, cs = store.load_nn_correlation(cfg.hash, 6, "full-symmetry")
    assert len(rs) == 3


def test_sweep_deterministic_bytes(tmp_path):
    # identical config run into two fresh directories: bit-identical CSVs
    cfg = make_cfg(tmp_path)
    run_sweep(cfg, out_dir=tmp_path / "a", log=lambda *_: None)
    run_sweep(cfg, out_dir=tmp_path / "b", log=lambda *_: None)
    for name in CSV_SCHEMAS:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_records_failures(tmp_path):
    # a K too large for the smallest chain fails validation per point
    raw = copy.deepcopy(BASE_CFG)
    raw["output"] = str(tmp_path / "store")
    cfg = parse_config(raw)
    # sabotage one point by monkeypatching run_point
    import rotorchain.sweep as sweep_mod

    orig = sweep_mod.run_point

    def flaky(cfg_, n, value, eps, seed):
        if n == 4 and value == 15.0:
            raise RuntimeError("synthetic failure")
        return orig(cfg_, n, value, eps, seed)

    sweep_mod.run_point = flaky
    try:
        store = run_sweep(cfg, log=lambda *_: None)
    finally:
        sweep_mod.run_point = orig
    entry = store.manifest["configs"][cfg.hash]
    assert len(entry["completed"]) == 5
    assert len(entry["failures"]) == 1
    assert "synthetic failure" in entry["failures"][0]["error"]


# -- analysis ------------------------------------------------------------

def test_analyze_missing_data_lists_points(tmp_path):
    cfg = make_cfg(tmp_path)
    store = ResultStore(cfg.output)
    store.register_config(cfg.hash, cfg.raw)
    with pytest.raises(MissingDataError) as err:
        analyze(store, cfg, "eta")
    assert len(err.value.missing) == 6
    assert "N=4" in str(err.value)


def test_analyze_eta_and_write(tmp_path):
    # synthetic store carrying a clean power law
    cfg = make_cfg(tmp_path, grid={"sizes": [33], "spacings_bohr": [10.0]})
    store = ResultStore(cfg.output)
    store.register_config(cfg.hash, cfg.raw)
    from rotorchain.observables import RunRecord

    n, m = 33, 16
    corr = np.array([abs(j - m) ** (-0.25) if j != m else 1.0 for j in range(n)])
    rec = RunRecord(n_sites=n, spacing=10.0, interaction_range=1,
                    mode="full-symmetry", engine="ed", e0=-1.0,
                    entropy_profile=np.zeros(n - 1),
                    schmidt_center=np.array([1.0]), c_nn=0.1,
                    corr_site=m, corr_profile=corr, polarization=0.0)
    store.append_record(cfg.hash, rec)
    fit = analyze(store, cfg, "eta")
    assert fit.params["eta"] == pytest.approx(0.25, abs=1e-10)
    path = write_fit(fit, store.path, "eta")
    data = json.loads(Path(path).read_text())
    assert data["params"]["eta"] == pytest.approx(0.25, abs=1e-10)
    assert (store.path / "report_eta.txt").exists()


# -- CLI -----------------------------------------------------------------

def test_cli_sweep_analyze_plot(tmp_path):
    path = write_cfg_file(tmp_path)
    assert main(["sweep", "--config", str(path)]) == 0
    store_dir = str(tmp_path / "store")
    # two sizes only: collapse should report a config-style failure (exit 2)
    assert main(["analyze", "--config", str(path), "--which", "collapse"]) == 2
    assert main(["plot", "--store", store_dir]) == 0
    figs = list((tmp_path / "store" / "figures").glob("*.csv"))
    assert figs
    for f in figs:
        assert (f.parent / (f.stem + ".gnuplot")).exists()


def test_cli_plot_empty(tmp_path):
    assert main(["plot", "--store", str(tmp_path / "nothing")]) == 1


def test_cli_bad_config(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("model: bogus\ngrid: {sizes: [4], spacings_bohr: [1.0]}\n")
    assert main(["sweep", "--config", str(bad)]) == 2


def test_cli_basis_dump(tmp_path, capsys):
    path = write_cfg_file(tmp_path)
    assert main(["basis", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "1_11" in out


def test_cli_oracle(tmp_path):
    path = write_cfg_file(
        tmp_path,
        grid={"sizes": [4], "spacings_bohr": [13.0, 16.0]},
        dmrg={"chi_max": 32, "excited_states": 0},
        engine="dmrg")
    assert main(["oracle", "--config", str(path)]) == 0


def test_cli_workers_parallel(tmp_path):
    path = write_cfg_file(tmp_path, name="par.yaml",
                          grid={"sizes": [4], "spacings_bohr": [13.0, 17.0]},
                          output=str(tmp_path / "par_store"))
    assert main(["sweep", "--config", str(path), "--workers", "2"]) == 0
    store = ResultStore(tmp_path / "par_store")
    hashes = store.config_hashes()
    assert len(store.completed_points(hashes[0])) == 2


# -- figures ------------------------------------------------------------

def test_emit_plots_full_set(tmp_path):
    """A store holding every experiment mode yields all twelve figures."""
    from rotorchain.plots import FIGURES, emit_plots

    grid_small = {"sizes": [4, 6], "spacings_bohr": [12.0, 14.0, 16.0],
                  "interaction_range": 1}
    out = str(tmp_path / "store")
    configs = [
        make_cfg(tmp_path, output=out, mode="full-symmetry", grid=grid_small),
        make_cfg(tmp_path, output=out, mode="broken-z", grid=grid_small),
        make_cfg(tmp_path, output=out, mode="broken-xy", grid=grid_small),
        make_cfg(tmp_path, output=out, mode="ssd-critical", engine="dmrg",
                 grid={"sizes": [20], "spacings_bohr": [15.0]}),
        make_cfg(tmp_path, output=out, mode="bond-weaken",
                 bond_weaken_eps=[1e-1, 1e-3], grid=grid_small),
        make_cfg(tmp_path, output=out, mode="full-symmetry",
                 grid={"sizes": [7], "spacings_bohr": [15.0]}),
    ]
    store = None
    for cfg in configs:
        store = run_sweep(cfg, log=lambda *_: None)
    emitted = emit_plots(store, tmp_path / "figs")
    assert len(emitted) == len(FIGURES) == 12
