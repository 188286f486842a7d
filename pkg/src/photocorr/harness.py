"""Sweep harness: runs scenario configs and writes CSV + JSON manifests.

Every run emits one CSV of machine-readable rows plus a sidecar manifest
holding the full config echo, the effective seed, library versions and
wall-clock timings. Numerical CSV content is a pure function of
(config, seed): timings and the timestamp live only in the manifest, so
re-running a config reproduces the CSV byte for byte at any thread count.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import time
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .errors import ValidationError
from .geometry import ScenarioConfig
from .greens import coeff_matrix_pair, coupling_matrices
from .quantum import (
    N_MAX_EVOLVE,
    N_MAX_STEADY,
    build_liouvillian,
    evolve,
    inverted_state,
    steady_state,
)
from .correlations import (
    a2_zero_delay,
    emission_rate,
    far_field_inverted_g2,
    inverted_array_closed_form,
)
from .sampling import (
    SamplingConfig,
    apply_offset,
    estimate,
    mean_percentage_error,
    mwise_emission_trace,
)


def derive_seed(seed: int, *key) -> int:
    """Deterministic child seed for a labelled sub-stream of a run."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def config_fingerprint(cfg_dict: dict) -> str:
    blob = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SweepRow:
    d_over_lambda: float
    method: str
    value: float
    std_error: float


@dataclass
class SweepResult:
    fingerprint: str
    rows: list
    csv_path: Path
    manifest_path: Path


def _resolve_out_dir(out_dir) -> Path:
    if out_dir is None:
        out_dir = os.environ.get("PHOTOCORR_OUT_DIR", ".")
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(config) -> ScenarioConfig:
    if isinstance(config, ScenarioConfig):
        return config
    return ScenarioConfig.from_json(config)


def _load_raw(config) -> dict:
    if isinstance(config, ScenarioConfig):
        return {}
    with open(config) as fh:
        return json.load(fh)


def _write_manifest(path: Path, cfg_dict: dict, fingerprint: str, timings: dict, extra=None):
    manifest = {
        "config": cfg_dict,
        "fingerprint": fingerprint,
        "versions": {
            "photocorr": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "timings_ms": timings,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _closed_form_value(scenario: ScenarioConfig, array) -> float:
    if scenario.protocol != "inverted-free-decay" or scenario.time != 0.0:
        raise ValidationError(
            "closed-form method applies to the inverted array at t = 0 only"
        )
    if scenario.flavor == "total":
        return inverted_array_closed_form(coupling_matrices(array).gamma)
    if scenario.flavor == "directional":
        det = scenario.detector
        return far_field_inverted_g2(array, det.direction_a, det.direction_b)
    raise ValidationError(
        "no closed form for the polarized-directional flavor"
    )


def _exact_value(scenario: ScenarioConfig, array, allow_large: bool) -> float:
    n = array.count
    couplings = coupling_matrices(array)
    if scenario.protocol == "driven-steady-state":
        if n > N_MAX_STEADY and not allow_large:
            raise ValidationError(
                f"exact steady state limited to N <= {N_MAX_STEADY} (got {n}); "
                "use --unsafe-dims to override"
            )
        lio = build_liouvillian(couplings, scenario.drive, array, allow_large)
        rho = steady_state(lio, allow_large=allow_large)
    else:
        if n > N_MAX_EVOLVE and not allow_large:
            raise ValidationError(
                f"exact evolution limited to N <= {N_MAX_EVOLVE} (got {n})"
            )
        rho = inverted_state(n)
        t = float(scenario.time)
        if t > 0.0:
            drive = scenario.drive if scenario.protocol == "driven-transient" else None
            lio = build_liouvillian(couplings, drive, array, allow_large)
            rho = evolve(rho, lio, [t])[-1]
    a_a, a_b = coeff_matrix_pair(array, scenario.flavor, scenario.detector, couplings=couplings)
    return a2_zero_delay(rho, a_a, a_b, time=scenario.time).value


def run_sweep(
    config,
    out_dir=None,
    seed: Optional[int] = None,
    threads: int = 1,
    allow_large: bool = False,
    stem: str = "sweep",
) -> SweepResult:
    """Separation sweep of the configured methods; writes CSV + manifest.

    Sampled methods and their offset-corrected variants share per-point
    sample streams, so a "-corr" row is the same estimate shifted by the
    method's constant offset.
    """
    scenario = _load(config)
    if seed is not None:
        scenario = dc_replace(scenario, seed=int(seed))
    if not scenario.d_grid:
        raise ValidationError("sweep config needs a non-empty d_grid")
    out = _resolve_out_dir(out_dir)
    cfg_dict = scenario.to_dict()
    fingerprint = config_fingerprint(cfg_dict)

    rows = []
    timings = {}
    method_codes = {"pairwise": 1, "m-wise": 2}
    t_start = time.perf_counter()
    for d_idx, d in enumerate(scenario.d_grid):
        array = scenario.geometry.build(d)
        raw_cache = {}
        for method in scenario.methods:
            t0 = time.perf_counter()
            base = method[:-5] if method.endswith("-corr") else method
            if method == "closed-form":
                value, std_err = _closed_form_value(scenario, array), 0.0
            elif method == "exact":
                value, std_err = _exact_value(scenario, array, allow_large), 0.0
            else:
                est = raw_cache.get(base)
                if est is None:
                    samp = scenario.sampling
                    cfg = SamplingConfig(
                        method=base,
                        m=2 if base == "pairwise" else samp.m,
                        samples=samp.samples_pairwise if base == "pairwise" else samp.samples_mwise,
                        seed=derive_seed(scenario.seed, d_idx, method_codes[base]),
                        apply_offset=False,
                        exhaustive=samp.exhaustive,
                    )
                    est = estimate(scenario, cfg, d_over_lambda=d, threads=threads)
                    raw_cache[base] = est
                if method.endswith("-corr"):
                    est = apply_offset(est, array.count)
                value, std_err = est.mean, est.std_error
            rows.append(SweepRow(d, method, value, std_err))
            timings[f"{d_idx}:{method}"] = (time.perf_counter() - t0) * 1e3
    timings["total"] = (time.perf_counter() - t_start) * 1e3

    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w") as fh:
        fh.write("d_over_lambda,method,value,std_error\n")
        for row in rows:
            fh.write(
                f"{_fmt(row.d_over_lambda)},{row.method},{_fmt(row.value)},{_fmt(row.std_error)}\n"
            )
    manifest_path = out / f"{stem}.manifest.json"
    _write_manifest(manifest_path, cfg_dict, fingerprint, timings, extra={"csv": csv_path.name})
    return SweepResult(fingerprint, rows, csv_path, manifest_path)


# -- error scan ----------------------------------------------------------------


@dataclass
class ErrorScanResult:
    fingerprint: str
    table: dict  # {(n, method): mpe_percent}
    crossover_uncorrected: float
    crossover_corrected: float
    csv_path: Path
    manifest_path: Path


def _crossover(n_values, err_pair, err_mwise) -> float:
    """N where the pairwise error first drops below the m-wise error.

    Linear interpolation of the error difference; extrapolated from the
    last segment when no sign change falls inside the scanned range.
    """
    n_values = np.asarray(n_values, dtype=float)
    diff = np.asarray(err_pair) - np.asarray(err_mwise)
    for k in range(len(diff) - 1):
        if diff[k] > 0 >= diff[k + 1]:
            frac = diff[k] / (diff[k] - diff[k + 1])
            return float(n_values[k] + frac * (n_values[k + 1] - n_values[k]))
    if diff[-1] <= 0:
        return float(n_values[np.argmax(diff <= 0)])
    slope = (diff[-1] - diff[-2]) / (n_values[-1] - n_values[-2])
    if slope >= 0:
        return float("inf")
    return float(min(n_values[-1] - diff[-1] / slope, 2 * n_values[-1]))


def run_error_scan(
    config,
    out_dir=None,
    seed: Optional[int] = None,
    threads: int = 1,
    stem: str = "error_scan",
) -> ErrorScanResult:
    """Mean-percentage-error table over emitter number N for a 1D chain.

    For each N in ``n_range`` the exact inverted-array curve over the d-grid
    is compared against both sampling methods, with and without offsets.
    For chains no larger than the configured sample size the m-wise method
    degenerates gracefully: the subset is the whole register (m_eff = N,
    one exhaustive sample, zero offset), which reproduces the exact value.
    Reports the optimal-method crossover (expected near N = 2m).
    """
    scenario = _load(config)
    raw = _load_raw(config)
    if seed is not None:
        scenario = dc_replace(scenario, seed=int(seed))
    if scenario.geometry.kind != "chain":
        raise ValidationError("error scan expects a chain geometry family")
    if scenario.protocol != "inverted-free-decay" or scenario.time != 0.0:
        raise ValidationError("error scan applies to the inverted array at t = 0")
    if not scenario.d_grid:
        raise ValidationError("error scan needs a non-empty d_grid")
    n_lo, n_hi = raw.get("n_range", (3, 12))
    if not (2 <= n_lo <= n_hi):
        raise ValidationError(f"invalid n_range ({n_lo}, {n_hi})")
    out = _resolve_out_dir(out_dir)
    cfg_dict = scenario.to_dict()
    cfg_dict["n_range"] = [int(n_lo), int(n_hi)]
    fingerprint = config_fingerprint(cfg_dict)

    samp = scenario.sampling
    n_values = list(range(int(n_lo), int(n_hi) + 1))
    table = {}
    timings = {}
    t_start = time.perf_counter()
    for n in n_values:
        t0 = time.perf_counter()
        geo = dc_replace(scenario.geometry, count=n)
        scen_n = dc_replace(scenario, geometry=geo)
        exact = np.array(
            [
                inverted_array_closed_form(coupling_matrices(geo.build(d)).gamma)
                for d in scenario.d_grid
            ]
        )
        m_eff = min(samp.m, n)
        curves = {"pairwise": [], "m-wise": []}
        corrected = {"pairwise": [], "m-wise": []}
        for d_idx, d in enumerate(scenario.d_grid):
            for base, code in (("pairwise", 1), ("m-wise", 2)):
                cfg = SamplingConfig(
                    method=base,
                    m=2 if base == "pairwise" else m_eff,
                    samples=samp.samples_pairwise if base == "pairwise" else samp.samples_mwise,
                    seed=derive_seed(scenario.seed, n, d_idx, code),
                    apply_offset=False,
                    exhaustive=(base == "m-wise" and m_eff == n),
                )
                est = estimate(scen_n, cfg, d_over_lambda=d, threads=threads)
                curves[base].append(est.mean)
                corrected[base].append(apply_offset(est, n).mean)
        table[(n, "pairwise")] = mean_percentage_error(exact, curves["pairwise"])
        table[(n, "m-wise")] = mean_percentage_error(exact, curves["m-wise"])
        table[(n, "pairwise-corr")] = mean_percentage_error(exact, corrected["pairwise"])
        table[(n, "m-wise-corr")] = mean_percentage_error(exact, corrected["m-wise"])
        timings[str(n)] = (time.perf_counter() - t0) * 1e3
    timings["total"] = (time.perf_counter() - t_start) * 1e3

    cross_raw = _crossover(
        n_values,
        [table[(n, "pairwise")] for n in n_values],
        [table[(n, "m-wise")] for n in n_values],
    )
    cross_corr = _crossover(
        n_values,
        [table[(n, "pairwise-corr")] for n in n_values],
        [table[(n, "m-wise-corr")] for n in n_values],
    )

    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w") as fh:
        fh.write("n,method,mpe_percent\n")
        for n in n_values:
            for method in ("pairwise", "pairwise-corr", "m-wise", "m-wise-corr"):
                fh.write(f"{n},{method},{_fmt(table[(n, method)])}\n")
    manifest_path = out / f"{stem}.manifest.json"
    _write_manifest(
        manifest_path,
        cfg_dict,
        fingerprint,
        timings,
        extra={
            "csv": csv_path.name,
            "crossover_n_uncorrected": cross_raw,
            "crossover_n_corrected": cross_corr,
            "sample_size_m": samp.m,
        },
    )
    return ErrorScanResult(fingerprint, table, cross_raw, cross_corr, csv_path, manifest_path)


# -- emission trace --------------------------------------------------------------


@dataclass
class EmissionTraceResult:
    fingerprint: str
    t_grid: np.ndarray
    traces: dict  # method label -> (values, std_errors)
    csv_path: Path
    manifest_path: Path


def run_emission_trace(
    config,
    out_dir=None,
    seed: Optional[int] = None,
    threads: int = 1,
    allow_large: bool = False,
    stem: str = "emission",
) -> EmissionTraceResult:
    """Normalized emission rate R(t)/R(0) per method on a shared time grid.

    The exact trace is included when the register fits the evolution limit;
    m-wise sampled traces run for every m in the config's ``m_values`` list
    (default: the single configured sample size).
    """
    scenario = _load(config)
    raw = _load_raw(config)
    if seed is not None:
        scenario = dc_replace(scenario, seed=int(seed))
    if scenario.protocol != "inverted-free-decay":
        raise ValidationError("emission traces require the inverted free-decay protocol")
    if scenario.t_grid is None:
        raise ValidationError("emission trace config needs a t_grid")
    out = _resolve_out_dir(out_dir)
    cfg_dict = scenario.to_dict()
    m_values = [int(m) for m in raw.get("m_values", [scenario.sampling.m])]
    cfg_dict["m_values"] = m_values
    fingerprint = config_fingerprint(cfg_dict)

    t_grid = np.asarray(scenario.t_grid, dtype=float)
    array = scenario.geometry.build()
    n = array.count
    traces = {}
    timings = {}
    t_start = time.perf_counter()

    if "exact" in scenario.methods:
        if n > N_MAX_EVOLVE and not allow_large:
            raise ValidationError(f"exact trace limited to N <= {N_MAX_EVOLVE}")
        t0 = time.perf_counter()
        couplings = coupling_matrices(array)
        lio = build_liouvillian(couplings, None, array, allow_large)
        rho0 = inverted_state(n)
        if t_grid[0] == 0.0:
            states = [rho0] + (evolve(rho0, lio, t_grid[1:]) if t_grid.size > 1 else [])
        else:
            states = evolve(rho0, lio, t_grid)
        rates = np.array([emission_rate(st, couplings.gamma) for st in states])
        traces["exact"] = (rates / rates[0], np.zeros_like(rates))
        timings["exact"] = (time.perf_counter() - t0) * 1e3

    for k, m in enumerate(m_values):
        t0 = time.perf_counter()
        cfg = SamplingConfig(
            method="m-wise",
            m=m,
            samples=scenario.sampling.samples_mwise,
            seed=derive_seed(scenario.seed, 1000 + k),
        )
        mean, std_err = mwise_emission_trace(scenario, cfg, t_grid, threads=threads)
        traces[f"m-wise(m={m})"] = (mean, std_err)
        timings[f"m-wise(m={m})"] = (time.perf_counter() - t0) * 1e3
    timings["total"] = (time.perf_counter() - t_start) * 1e3

    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w") as fh:
        fh.write("t,method,value,std_error\n")
        for label, (vals, errs) in traces.items():
            for t, v, e in zip(t_grid, vals, errs):
                fh.write(f"{_fmt(t)},{label},{_fmt(v)},{_fmt(e)}\n")
    manifest_path = out / f"{stem}.manifest.json"
    _write_manifest(manifest_path, cfg_dict, fingerprint, timings, extra={"csv": csv_path.name})
    return EmissionTraceResult(fingerprint, t_grid, traces, csv_path, manifest_path)
