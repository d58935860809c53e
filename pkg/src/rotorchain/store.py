"""Append-only result store: per-observable CSV files plus a JSON manifest.

Column layouts are fixed and versioned; floats are serialized with 17
significant digits so that parsing them back is bit-exact. Completed
(config, N, R, mode) points are tracked in the manifest, which makes
re-running an identical config a no-op.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .observables import RunRecord

SCHEMA_VERSION = 1
CSV_SCHEMAS = {
    "gaps.csv": "config_hash,N,R,mode,E0,E1,E2,gap1,gap2",
    "entropy.csv": "config_hash,N,R,mode,bond,SvN",
    "schmidt.csv": "config_hash,N,R,mode,rank,lambda",
    "corr.csv": "config_hash,N,R,mode,m,j,Czz",
    "polar.csv": "config_hash,N,R,mode,p",
    # supplementary to the five fixed tables: bond-averaged NN correlation
    "nncorr.csv": "config_hash,N,R,mode,C",
}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


class ResultStore:
    def __init__(self, path):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.path / "manifest.json"
        if self.manifest_path.exists():
            with open(self.manifest_path) as fh:
                self.manifest = json.load(fh)
        else:
            self.manifest = {"version": SCHEMA_VERSION, "configs": {}}
        for name, header in CSV_SCHEMAS.items():
            f = self.path / name
            if not f.exists():
                f.write_text(header + "\n")

    # -- manifest ------------------------------------------------------

    def _flush_manifest(self) -> None:
        tmp = self.manifest_path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(self.manifest, fh, indent=1, sort_keys=True)
        os.replace(tmp, self.manifest_path)

    def register_config(self, cfg_hash: str, raw_config: dict) -> None:
        entry = self.manifest["configs"].setdefault(cfg_hash, {})
        entry.setdefault("config", raw_config)
        entry.setdefault("completed", [])
        entry.setdefault("failures", [])
        self._flush_manifest()

    def _key(self, n: int, r: float, mode: str) -> list:
        return [int(n), fmt(r), mode]

    def has_point(self, cfg_hash: str, n: int, r: float, mode: str) -> bool:
        entry = self.manifest["configs"].get(cfg_hash)
        return bool(entry) and self._key(n, r, mode) in entry["completed"]

    def mark_failure(self, cfg_hash: str, n: int, r: float, mode: str, message: str) -> None:
        entry = self.manifest["configs"][cfg_hash]
        entry["failures"].append({"point": self._key(n, r, mode), "error": message})
        self._flush_manifest()

    def completed_points(self, cfg_hash: str) -> list:
        entry = self.manifest["configs"].get(cfg_hash)
        return list(entry["completed"]) if entry else []

    def config_hashes(self) -> list[str]:
        return sorted(self.manifest["configs"])

    def config_of(self, cfg_hash: str) -> dict:
        return self.manifest["configs"][cfg_hash]["config"]

    # -- writing ---------------------------------------------------------

    def _append(self, name: str, rows: list[str]) -> None:
        with open(self.path / name, "a") as fh:
            fh.write("".join(r + "\n" for r in rows))

    def append_record(self, cfg_hash: str, rec: RunRecord) -> None:
        if self.has_point(cfg_hash, rec.n_sites, rec.spacing, rec.mode):
            return
        head = f"{cfg_hash},{rec.n_sites},{fmt(rec.spacing)},{rec.mode}"
        self._append("gaps.csv", [
            f"{head},{fmt(rec.e0)},{fmt(rec.e1)},{fmt(rec.e2)},"
            f"{fmt(rec.gap1)},{fmt(rec.gap2)}"])
        self._append("entropy.csv", [
            f"{head},{bond},{fmt(s)}"
            for bond, s in enumerate(rec.entropy_profile, start=1)])
        self._append("schmidt.csv", [
            f"{head},{rank},{fmt(lam)}"
            for rank, lam in enumerate(rec.schmidt_center, start=1)])
        if len(rec.corr_profile):
            self._append("corr.csv", [
                f"{head},{rec.corr_site + 1},{j + 1},{fmt(c)}"
                for j, c in enumerate(rec.corr_profile)])
        self._append("polar.csv", [f"{head},{fmt(rec.polarization)}"])
        self._append("nncorr.csv", [f"{head},{fmt(rec.c_nn)}"])
        entry = self.manifest["configs"][cfg_hash]
        entry["completed"].append(self._key(rec.n_sites, rec.spacing, rec.mode))
        self._flush_manifest()

    # -- reading -----------------------------------------------------------

    def _read_rows(self, name: str, cfg_hash: str, mode: str | None = None) -> list[list[str]]:
        out = []
        with open(self.path / name) as fh:
            header = fh.readline()
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if parts[0] != cfg_hash:
                    continue
                if mode is not None and parts[3] != mode:
                    continue
                out.append(parts)
        return out

    def load_curves(self, cfg_hash: str, mode: str, quantity: str) -> dict:
        """{N: (R array, observable array)} for one config and mode.

        quantity: schmidt-gap | polarization | entropy-center | c-nn-proxy
        (the latter is gap data: gap1 or gap2 also accepted).
        """
        per_point: dict[tuple[int, float], float] = {}
        if quantity == "schmidt-gap":
            lam: dict[tuple[int, float], dict[int, float]] = {}
            for parts in self._read_rows("schmidt.csv", cfg_hash, mode):
                key = (int(parts[1]), float(parts[2]))
                lam.setdefault(key, {})[int(parts[4])] = float(parts[5])
            for key, ranks in lam.items():
                per_point[key] = ranks.get(1, np.nan) - ranks.get(2, 0.0)
        elif quantity == "polarization":
            for parts in self._read_rows("polar.csv", cfg_hash, mode):
                per_point[(int(parts[1]), float(parts[2]))] = abs(float(parts[4]))
        elif quantity in ("gap1", "gap2"):
            col = 7 if quantity == "gap1" else 8
            for parts in self._read_rows("gaps.csv", cfg_hash, mode):
                per_point[(int(parts[1]), float(parts[2]))] = float(parts[col])
        elif quantity == "entropy-center":
            for parts in self._read_rows("entropy.csv", cfg_hash, mode):
                n = int(parts[1])
                if int(parts[4]) == n // 2:
                    per_point[(n, float(parts[2]))] = float(parts[5])
        else:
            raise ValueError(f"unknown curve quantity {quantity!r}")
        curves: dict[int, tuple[list, list]] = {}
        for (n, r), val in sorted(per_point.items()):
            curves.setdefault(n, ([], []))
            curves[n][0].append(r)
            curves[n][1].append(val)
        return {n: (np.asarray(r), np.asarray(v)) for n, (r, v) in curves.items()}

    def load_entropy_profile(self, cfg_hash: str, n: int, r: float, mode: str) -> np.ndarray:
        rows = [p for p in self._read_rows("entropy.csv", cfg_hash, mode)
                if int(p[1]) == n and float(p[2]) == float(r)]
        prof = np.full(n - 1, np.nan)
        for p in rows:
            prof[int(p[4]) - 1] = float(p[5])
        if np.any(np.isnan(prof)):
            raise KeyError(f"no complete entropy profile for N={n}, R={r}, mode={mode}")
        return prof

    def load_corr_profile(self, cfg_hash: str, n: int, r: float, mode: str):
        rows = [p for p in self._read_rows("corr.csv", cfg_hash, mode)
                if int(p[1]) == n and float(p[2]) == float(r)]
        if not rows:
            raise KeyError(f"no correlation profile for N={n}, R={r}, mode={mode}")
        m = int(rows[0][4]) - 1
        prof = np.full(n, np.nan)
        for p in rows:
            prof[int(p[5]) - 1] = float(p[6])
        return m, prof

    def load_schmidt_values(self, cfg_hash: str, n: int, r: float, mode: str) -> np.ndarray:
        rows = [p for p in self._read_rows("schmidt.csv", cfg_hash, mode)
                if int(p[1]) == n and float(p[2]) == float(r)]
        ranks = sorted((int(p[4]), float(p[5])) for p in rows)
        return np.array([v for _, v in ranks])

    def load_nn_correlation(self, cfg_hash: str, n: int, mode: str):
        """(R array, bond-averaged NN correlation array) for one size."""
        pairs = []
        for parts in self._read_rows("nncorr.csv", cfg_hash, mode):
            if int(parts[1]) == n:
                pairs.append((float(parts[2]), float(parts[4])))
        pairs.sort()
        return (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    def load_gap_row(self, cfg_hash: str, n: int, r: float, mode: str):
        for parts in self._read_rows("gaps.csv", cfg_hash, mode):
            if int(parts[1]) == n and float(parts[2]) == float(r):
                return {"e0": float(parts[4]), "e1": float(parts[5]),
                        "e2": float(parts[6]), "gap1": float(parts[7]),
                        "gap2": float(parts[8])}
        raise KeyError(f"no gaps row for N={n}, R={r}, mode={mode}")
