"""Figure-data emission: per-figure CSV files plus gnuplot scripts.

Each figure builder pulls what it needs from the result store (across all
configs recorded in the manifest) and silently skips when the data is not
there, so partial stores yield partial figure sets. A full store (all
experiment modes present) yields the complete set of twelve data files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .criticality import central_charge_fit, crossing_points, eta_fit
from .observables import nn_correlation_derivative
from .store import ResultStore, fmt


def _configs_by_mode(store: ResultStore) -> dict:
    out: dict[str, list] = {}
    for h in store.config_hashes():
        raw = store.config_of(h)
        out.setdefault(raw.get("mode", "full-symmetry"), []).append((h, raw))
    return out


def _grid_of(raw: dict) -> tuple[list[int], list[float]]:
    grid = raw.get("grid", {})
    values = grid.get("spacings_bohr") or grid.get("transverse_fields") or []
    return [int(n) for n in grid.get("sizes", [])], [float(v) for v in values]


def _mode_label(raw: dict) -> str:
    if raw.get("mode") == "bond-weaken":
        eps = raw.get("bond_weaken_eps", [1e-3])
        return f"bond-weaken:{float(eps[0]):g}"
    return raw.get("mode", "full-symmetry")


def _pick_sweep(entries, min_sizes=1, min_values=1):
    """Prefer the entry with the largest N and the densest grid."""
    best = None
    for h, raw in entries:
        sizes, values = _grid_of(raw)
        if len(sizes) < min_sizes or len(values) < min_values:
            continue
        key = (max(sizes), len(values))
        if best is None or key > best[0]:
            best = (key, h, raw)
    return (best[1], best[2]) if best else (None, None)


def _curve_rows(store, h, raw, quantity):
    curves = store.load_curves(h, _mode_label(raw), quantity)
    rows = []
    for n in sorted(curves):
        r, v = curves[n]
        rows += [(n, rr, vv) for rr, vv in zip(r, v)]
    return curves, rows


# -- individual figure builders (return (rows, header) or None) ---------

def _fig1_schmidt_gap(store):
    entries = _configs_by_mode(store).get("full-symmetry", [])
    h, raw = _pick_sweep(entries, min_values=3)
    if h is None:
        return None
    curves, _ = _curve_rows(store, h, raw, "schmidt-gap")
    n = max(curves)
    r, v = curves[n]
    return [(rr, vv) for rr, vv in zip(r, v)], "R,schmidt_gap", \
        f"Schmidt gap vs spacing (N={n})"


def _fig2ab_gaps(store):
    by_mode = _configs_by_mode(store)
    rows = []
    for mode in ("full-symmetry", "broken-z", "broken-xy"):
        for h, raw in by_mode.get(mode, []):
            curves = store.load_curves(h, _mode_label(raw), "gap1")
            curves2 = store.load_curves(h, _mode_label(raw), "gap2")
            for n in sorted(curves):
                r, g1 = curves[n]
                _, g2 = curves2[n]
                good = ~(np.isnan(g1) | np.isnan(g2))
                rows += [(mode, n, rr, a, b)
                         for rr, a, b in zip(r[good], g1[good], g2[good])]
    return (rows, "mode,N,R,gap1,gap2", "excitation gaps vs spacing") if rows else None


def _fig2cd_entropy(store):
    by_mode = _configs_by_mode(store)
    rows = []
    for mode in ("full-symmetry", "broken-z", "broken-xy"):
        for h, raw in by_mode.get(mode, []):
            curves = store.load_curves(h, _mode_label(raw), "entropy-center")
            for n in sorted(curves):
                r, s = curves[n]
                rows += [(mode, n, rr, ss) for rr, ss in zip(r, s)]
    return (rows, "mode,N,R,SvN_center", "half-chain entropy vs spacing") if rows else None


def _fig2ef_schmidt_values(store):
    by_mode = _configs_by_mode(store)
    rows = []
    for mode in ("full-symmetry", "broken-z", "broken-xy"):
        h, raw = _pick_sweep(by_mode.get(mode, []), min_values=3)
        if h is None:
            continue
        sizes, values = _grid_of(raw)
        n = max(sizes)
        for r in values:
            try:
                lam = store.load_schmidt_values(h, n, r, _mode_label(raw))
            except KeyError:
                continue
            rows += [(mode, n, r, rank + 1, v)
                     for rank, v in enumerate(lam[:10])]
    return (rows, "mode,N,R,rank,lambda", "leading Schmidt values vs spacing") if rows else None


def _fig2gh_corr_derivative(store):
    by_mode = _configs_by_mode(store)
    rows = []
    for mode in ("full-symmetry", "broken-z", "broken-xy"):
        for h, raw in by_mode.get(mode, []):
            sizes, values = _grid_of(raw)
            if len(values) < 3:
                continue
            for n in sorted(set(sizes)):
                rs, cs = store.load_nn_correlation(h, n, _mode_label(raw))
                if len(rs) < 3:
                    continue
                rg, dc = nn_correlation_derivative(rs, cs)
                rows += [(mode, n, rr, vv) for rr, vv in zip(rg, dc)]
    return (rows, "mode,N,R,dCdR", "derivative of the NN correlation") if rows else None


def _fig3a_entropy_sizes(store):
    entries = _configs_by_mode(store).get("full-symmetry", [])
    h, raw = _pick_sweep(entries, min_sizes=2, min_values=3)
    if h is None:
        return None
    _, rows = _curve_rows(store, h, raw, "entropy-center")
    return rows, "N,R,SvN_center", "half-chain entropy for several sizes"


def _fig3b_schmidt_gap_collapse(store):
    entries = _configs_by_mode(store).get("full-symmetry", [])
    h, raw = _pick_sweep(entries, min_sizes=2, min_values=3)
    if h is None:
        return None
    curves, _ = _curve_rows(store, h, raw, "schmidt-gap")
    crossings = crossing_points(curves)
    rc = float(np.mean(crossings)) if crossings else float(
        np.median(np.concatenate([c[0] for c in curves.values()])))
    nu, beta = 1.0, 0.125
    rows = []
    for n in sorted(curves):
        r, v = curves[n]
        for rr, vv in zip(r, v):
            rows.append((n, rr, vv, (rr - rc) * n ** (1 / nu), vv * n ** (beta / nu)))
    return rows, "N,R,schmidt_gap,x_rescaled,y_rescaled", \
        f"Schmidt gap and Ising-class rescaling (rc~{rc:.4f})"


def _fig3c_polarization_sizes(store):
    entries = _configs_by_mode(store).get("broken-z", [])
    h, raw = _pick_sweep(entries, min_sizes=1, min_values=3)
    if h is None:
        return None
    _, rows = _curve_rows(store, h, raw, "polarization")
    return rows, "N,R,polarization", "polarization per molecule (broken inversion)"


def _fig3d_entropy_profile(store):
    entries = _configs_by_mode(store).get("ssd-critical", [])
    h, raw = _pick_sweep(entries)
    if h is None:
        return None
    sizes, values = _grid_of(raw)
    n = max(sizes)
    r = values[len(values) // 2]
    try:
        prof = store.load_entropy_profile(h, n, r, _mode_label(raw))
    except KeyError:
        return None
    fit = central_charge_fit(prof, n)
    bonds = np.arange(1, n)
    model = fit.params["c"] * np.log((n / np.pi) * np.sin(np.pi * bonds / n)) / 3.0 \
        + fit.params["const"]
    rows = [(int(b), s, m) for b, s, m in zip(bonds, prof, model)]
    return rows, "bond,SvN,fit", \
        f"entropy profile, c={fit.params['c']:.4f}+-{fit.errors['c']:.4f} (N={n}, R={r:g})"


def _fig3e_correlation(store):
    candidates = []
    for mode in ("full-symmetry", "ssd-critical"):
        candidates += _configs_by_mode(store).get(mode, [])
    h, raw = _pick_sweep([c for c in candidates
                          if max(_grid_of(c[1])[0]) % 2 == 1])
    if h is None:
        return None
    sizes, values = _grid_of(raw)
    n = max(sizes)
    r = values[len(values) // 2]
    try:
        m, corr = store.load_corr_profile(h, n, r, _mode_label(raw))
    except KeyError:
        return None
    try:
        fit = eta_fit(corr, m)
        eta, amp = fit.params["eta"], fit.params["amplitude"]
        note = f"eta={eta:.4f}+-{fit.errors['eta']:.4f}"
    except Exception:
        eta, amp, note = np.nan, np.nan, "power-law fit unavailable"
    rows = []
    for j in range(len(corr)):
        dist = abs(j - m)
        if dist == 0:
            continue
        model = amp * dist ** (-eta) if np.isfinite(eta) else np.nan
        rows.append((dist, corr[j], model))
    return rows, "distance,Czz,fit", f"two-point correlation from site {m + 1} ({note})"


def _fig4a_entropy_difference(store):
    by_mode = _configs_by_mode(store)
    fs = _pick_sweep(by_mode.get("full-symmetry", []), min_values=3)
    bz = _pick_sweep(by_mode.get("broken-z", []), min_values=3)
    if fs[0] is None or bz[0] is None:
        return None
    cf = store.load_curves(fs[0], "full-symmetry", "entropy-center")
    cb = store.load_curves(bz[0], "broken-z", "entropy-center")
    common_n = sorted(set(cf) & set(cb))
    if not common_n:
        return None
    rows = []
    for n in common_n:
        rf, sf = cf[n]
        rb, sb = cb[n]
        shared = sorted(set(rf) & set(rb))
        for r in shared:
            a = sf[np.nonzero(rf == r)[0][0]]
            b = sb[np.nonzero(rb == r)[0][0]]
            rows.append((n, r, a, b, a - b))
    return (rows, "N,R,SvN_full,SvN_broken,difference",
            "entropy removed by breaking inversion symmetry") if rows else None


def _fig4bc_bond_weakening(store):
    entries = _configs_by_mode(store).get("bond-weaken", [])
    if not entries:
        return None
    rows = []
    for h, raw in entries:
        sizes, values = _grid_of(raw)
        n = max(sizes)
        for eps in raw.get("bond_weaken_eps", []):
            mode = f"bond-weaken:{float(eps):g}"
            curves = store.load_curves(h, mode, "entropy-center")
            if n not in curves:
                continue
            r, s = curves[n]
            for rr, ss in zip(r, s):
                m, corr = store.load_corr_profile(h, n, rr, mode)
                cross = corr[m + 1] if m + 1 < n else np.nan
                rows.append((float(eps), n, rr, ss, cross))
    return (rows, "eps,N,R,SvN_center,cross_bond_Czz",
            "central entropy and cross-bond correlation vs bond weakening") if rows else None


FIGURES = [
    ("fig1_schmidt_gap", _fig1_schmidt_gap),
    ("fig2ab_gaps", _fig2ab_gaps),
    ("fig2cd_entropy", _fig2cd_entropy),
    ("fig2ef_schmidt_values", _fig2ef_schmidt_values),
    ("fig2gh_corr_derivative", _fig2gh_corr_derivative),
    ("fig3a_entropy_sizes", _fig3a_entropy_sizes),
    ("fig3b_schmidt_gap_collapse", _fig3b_schmidt_gap_collapse),
    ("fig3c_polarization_sizes", _fig3c_polarization_sizes),
    ("fig3d_entropy_profile", _fig3d_entropy_profile),
    ("fig3e_correlation", _fig3e_correlation),
    ("fig4a_entropy_difference", _fig4a_entropy_difference),
    ("fig4bc_bond_weakening", _fig4bc_bond_weakening),
]

_GNUPLOT = """# {title}
set datafile separator ','
set key autotitle columnhead
set title "{title}"
set grid
{extra}
plot '{csv}' using {using} with linespoints
"""

_PLOT_HINTS = {
    "fig1_schmidt_gap": ("1:2", ""),
    "fig2ab_gaps": ("3:4", "set logscale y"),
    "fig2cd_entropy": ("3:4", ""),
    "fig2ef_schmidt_values": ("3:5", "set logscale y"),
    "fig2gh_corr_derivative": ("3:4", ""),
    "fig3a_entropy_sizes": ("2:3", ""),
    "fig3b_schmidt_gap_collapse": ("4:5", ""),
    "fig3c_polarization_sizes": ("2:3", ""),
    "fig3d_entropy_profile": ("1:2", ""),
    "fig3e_correlation": ("1:2", "set logscale xy"),
    "fig4a_entropy_difference": ("2:5", ""),
    "fig4bc_bond_weakening": ("1:4", "set logscale x"),
}


def _format_row(row) -> str:
    parts = []
    for x in row:
        if isinstance(x, str):
            parts.append(x)
        elif isinstance(x, (int, np.integer)):
            parts.append(str(int(x)))
        else:
            parts.append(fmt(x))
    return ",".join(parts)


def emit_plots(store: ResultStore, out_dir) -> list[str]:
    """Write figure CSVs and gnuplot scripts; returns emitted data files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emitted = []
    for name, builder in FIGURES:
        try:
            built = builder(store)
        except Exception as exc:  # noqa: BLE001 - a bad figure must not block others
            print(f"[plots] skipping {name}: {exc}")
            continue
        if built is None:
            continue
        rows, header, title = built
        if not rows:
            continue
        csv = out / f"{name}.csv"
        with open(csv, "w") as fh:
            fh.write(header + "\n")
            fh.write("".join(_format_row(r) + "\n" for r in rows))
        using, extra = _PLOT_HINTS[name]
        (out / f"{name}.gnuplot").write_text(_GNUPLOT.format(
            title=title, csv=csv.name, using=using, extra=extra))
        emitted.append(csv.name)
    return emitted
