"""Render harness CSV outputs into publication-style figures.

Each renderer returns a RenderInfo with the numeric annotations it drew
(reference lines, markers), so callers and tests can check placement
without inspecting pixels. Rendering is a pure function of the inputs:
re-rendering a spec reproduces the output byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spec import FigureError, FigureSpec

_METADATA = {"Software": "photocorr-figures"}

_STYLES = {
    "closed-form": dict(color="crimson", linestyle="--", zorder=5),
    "exact": dict(color="crimson", linestyle="--", zorder=5),
    "pairwise": dict(color="tab:blue", marker="o", markersize=3),
    "pairwise-corr": dict(color="tab:cyan", marker="o", markersize=3),
    "m-wise": dict(color="tab:green", marker="s", markersize=3),
    "m-wise-corr": dict(color="tab:olive", marker="s", markersize=3),
}


@dataclass
class RenderInfo:
    output: Path
    kind: str
    methods: tuple
    reference_lines: dict = field(default_factory=dict)
    markers: dict = field(default_factory=dict)


def _read_table(path, required):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise FigureError(f"cannot read CSV {path}: {exc}")
    if not rows:
        raise FigureError(f"CSV {path} has no data rows")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        raise FigureError(f"CSV {path} is missing columns {missing}")
    return rows


def _group_by_method(rows, x_col, spec):
    methods = []
    series = {}
    for row in rows:
        m = row["method"]
        if m not in series:
            series[m] = {"x": [], "value": [], "err": []}
            methods.append(m)
        series[m]["x"].append(float(row[x_col]))
        series[m]["value"].append(float(row["value"]))
        series[m]["err"].append(float(row.get("std_error", 0.0) or 0.0))
    if spec.methods:
        methods = [m for m in methods if m in spec.methods]
    if not methods:
        raise FigureError("no requested methods present in the CSV; nothing to draw")
    return methods, {m: {k: np.array(v) for k, v in series[m].items()} for m in series}


def _emitter_count(manifest: dict) -> int:
    geo = manifest["config"]["geometry"]
    kind = geo.get("kind", "chain")
    if kind == "square-lattice":
        return int(geo["count"]) ** 2
    if kind == "custom":
        return len(geo["positions"])
    return int(geo["count"])


def _load_manifest(spec: FigureSpec) -> dict:
    if spec.manifest is None:
        raise FigureError(
            f"kind {spec.kind!r} needs the run manifest to compute reference values"
        )
    with open(spec.manifest) as fh:
        return json.load(fh)


def _crossing_of_unity(x, y):
    for k in range(len(x) - 1):
        lo, hi = y[k], y[k + 1]
        if (lo - 1.0) * (hi - 1.0) <= 0.0 and lo != hi:
            return float(x[k] + (lo - 1.0) / (lo - hi) * (x[k + 1] - x[k]))
    return None


def _save(fig, spec: FigureSpec) -> Path:
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi, metadata=_METADATA)
    plt.close(fig)
    return out


def _render_sweep(spec: FigureSpec) -> RenderInfo:
    rows = _read_table(spec.csv[0], ("d_over_lambda", "method", "value", "std_error"))
    methods, series = _group_by_method(rows, "d_over_lambda", spec)
    manifest = _load_manifest(spec)
    n = _emitter_count(manifest)
    dicke = 2.0 * (n - 1) / n
    independent = (n - 1) / n

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for m in methods:
        s = series[m]
        style = _STYLES.get(m, {})
        if m in ("closed-form", "exact"):
            ax.plot(s["x"], s["value"], label=m, **style)
        else:
            ax.errorbar(s["x"], s["value"], yerr=s["err"], label=m, capsize=2, **style)
    ax.axhline(dicke, color="black", linestyle="-.", linewidth=0.9)
    ax.axhline(independent, color="black", linestyle="-.", linewidth=0.9)

    markers = {}
    reference = next((m for m in ("closed-form", "exact") if m in series), None)
    if reference is not None:
        d_crit = _crossing_of_unity(series[reference]["x"], series[reference]["value"])
        if d_crit is not None:
            ax.axvline(d_crit, color="gray", linestyle=":", linewidth=1.0)
            markers["d_critical"] = d_crit

    ax.set_xlabel("d / wavelength")
    ax.set_ylabel("zero-delay correlation")
    ax.set_title(spec.title or f"inverted-array correlation, N = {n}")
    ax.legend(fontsize=8)
    out = _save(fig, spec)
    return RenderInfo(
        output=out,
        kind=spec.kind,
        methods=tuple(methods),
        reference_lines={"dicke": dicke, "independent": independent},
        markers=markers,
    )


def _render_error_scan(spec: FigureSpec) -> RenderInfo:
    rows = _read_table(spec.csv[0], ("n", "method", "mpe_percent"))
    manifest = _load_manifest(spec)
    m_size = int(
        manifest.get("sample_size_m", manifest["config"].get("sampling", {}).get("m", 2))
    )
    series = {}
    for row in rows:
        series.setdefault(row["method"], {"x": [], "y": []})
        series[row["method"]]["x"].append(int(row["n"]))
        series[row["method"]]["y"].append(float(row["mpe_percent"]))
    wanted = spec.methods or tuple(series)
    panels = (
        [m for m in ("pairwise", "m-wise") if m in wanted and m in series],
        [m for m in ("pairwise-corr", "m-wise-corr") if m in wanted and m in series],
    )
    if not panels[0] and not panels[1]:
        raise FigureError("no requested methods present in the CSV; nothing to draw")

    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.8), sharex=True)
    crossover = 2 * m_size
    for ax, methods, tag in zip(axes, panels, ("uncorrected", "offset-corrected")):
        for m in methods:
            ax.plot(series[m]["x"], series[m]["y"], label=m, **_STYLES.get(m, {}))
        mins = None
        if len(methods) == 2:
            a, b = (np.array(series[m]["y"]) for m in methods)
            mins = np.minimum(a, b)
            ax.plot(series[methods[0]]["x"], mins, color="crimson", linestyle="--",
                    linewidth=1.0, label="best method")
        ax.axvline(crossover, color="black", linewidth=1.0)
        ax.set_xlabel("number of emitters N")
        ax.set_title(tag)
        ax.legend(fontsize=7)
    axes[0].set_ylabel("mean percentage error (%)")
    if spec.title:
        fig.suptitle(spec.title)
    out = _save(fig, spec)
    drawn = tuple(m for panel in panels for m in panel)
    return RenderInfo(
        output=out, kind=spec.kind, methods=drawn, markers={"n_crossover": crossover}
    )


def _render_emission(spec: FigureSpec) -> RenderInfo:
    rows = _read_table(spec.csv[0], ("t", "method", "value", "std_error"))
    methods, series = _group_by_method(rows, "t", spec)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for m in methods:
        s = series[m]
        norm = s["value"][0] if s["value"][0] != 0 else 1.0
        style = dict(linestyle="--", color="crimson") if m == "exact" else {}
        ax.errorbar(s["x"], s["value"] / norm, yerr=s["err"] / norm, label=m,
                    capsize=2, **style)
    ax.axhline(1.0, color="gray", linewidth=0.6)
    ax.set_xlabel("time (1/gamma_0)")
    ax.set_ylabel("normalized emission rate R(t)/R(0)")
    ax.set_title(spec.title or "emission rate")
    ax.legend(fontsize=8)
    out = _save(fig, spec)
    return RenderInfo(output=out, kind=spec.kind, methods=tuple(methods))


def _render_distribution(spec: FigureSpec) -> RenderInfo:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    stds = {}
    for i, path in enumerate(spec.csv):
        rows = _read_table(path, ("sample_index", "indices", "value"))
        values = np.array([float(r["value"]) for r in rows])
        label = spec.labels[i] if i < len(spec.labels) else Path(path).stem
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        stds[label] = std
        ax.hist(values, bins=spec.bins, histtype="step",
                label=f"{label} (std {std:.3f})")
    ax.set_xlabel("per-sample correlation value")
    ax.set_ylabel("count")
    ax.set_title(spec.title or "sample-value distributions")
    ax.legend(fontsize=8)
    out = _save(fig, spec)
    return RenderInfo(
        output=out, kind=spec.kind, methods=tuple(stds), markers={"stds": stds}
    )


_RENDERERS = {
    "sweep-comparison": _render_sweep,
    "error-scan": _render_error_scan,
    "emission-trace": _render_emission,
    "distribution": _render_distribution,
}


def render(spec: FigureSpec) -> RenderInfo:
    """Render one figure spec to its output image."""
    return _RENDERERS[spec.kind](spec)
