import json

import numpy as np
import pytest

from photocorr.cli import main as cli_main
from photocorr.errors import ValidationError
from photocorr.correlations import inverted_array_closed_form
from photocorr.geometry import (
    DriveParams,
    GeometrySpec,
    SamplingSettings,
    ScenarioConfig,
)
from photocorr.greens import coupling_matrices
from photocorr.harness import (
    _crossover,
    run_emission_trace,
    run_error_scan,
    run_sweep,
)


def small_sweep_config(**overrides):
    base = dict(
        geometry=GeometrySpec(kind="chain", count=6, spacing=0.4),
        protocol="inverted-free-decay",
        flavor="total",
        time=0.0,
        d_grid=(0.2, 0.5, 0.9),
        methods=("closed-form", "pairwise", "pairwise-corr", "m-wise", "m-wise-corr"),
        sampling=SamplingSettings(m=3, samples_pairwise=300, samples_mwise=200),
        seed=314,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def test_run_sweep_structure(tmp_path):
    scen = small_sweep_config()
    res = run_sweep(scen, out_dir=tmp_path)
    assert res.csv_path.exists() and res.manifest_path.exists()
    methods = {r.method for r in res.rows}
    assert methods == set(scen.methods)
    assert len(res.rows) == len(scen.d_grid) * len(scen.methods)
    lines = res.csv_path.read_text().splitlines()
    assert lines[0] == "d_over_lambda,method,value,std_error"
    assert len(lines) == 1 + len(res.rows)


def test_run_sweep_closed_form_values(tmp_path):
    scen = small_sweep_config(methods=("closed-form",))
    res = run_sweep(scen, out_dir=tmp_path)
    for row in res.rows:
        arr = scen.geometry.build(row.d_over_lambda)
        want = inverted_array_closed_form(coupling_matrices(arr).gamma)
        assert row.value == pytest.approx(want, abs=1e-12)
        assert row.std_error == 0.0


def test_run_sweep_exact_matches_closed_form(tmp_path):
    scen = small_sweep_config(
        geometry=GeometrySpec(kind="chain", count=4, spacing=0.4),
        methods=("closed-form", "exact"),
        d_grid=(0.3, 0.7),
    )
    res = run_sweep(scen, out_dir=tmp_path)
    by_method = {}
    for row in res.rows:
        by_method.setdefault(row.d_over_lambda, {})[row.method] = row.value
    for d, vals in by_method.items():
        assert vals["exact"] == pytest.approx(vals["closed-form"], abs=1e-10)


def test_run_sweep_corrected_rows_shifted(tmp_path):
    scen = small_sweep_config()
    res = run_sweep(scen, out_dir=tmp_path)
    n = scen.geometry.emitter_count
    rows = {(r.d_over_lambda, r.method): r for r in res.rows}
    for d in scen.d_grid:
        raw = rows[(d, "pairwise")]
        corr = rows[(d, "pairwise-corr")]
        assert corr.value == pytest.approx(raw.value - 1 / n, abs=1e-14)
        assert corr.std_error == raw.std_error
        raw_m = rows[(d, "m-wise")]
        corr_m = rows[(d, "m-wise-corr")]
        assert corr_m.value == pytest.approx(raw_m.value + 1 / 3 - 1 / n, abs=1e-14)


def test_run_sweep_deterministic_across_threads(tmp_path):
    scen = small_sweep_config()
    res1 = run_sweep(scen, out_dir=tmp_path / "a", threads=1)
    res2 = run_sweep(scen, out_dir=tmp_path / "b", threads=8)
    assert res1.csv_path.read_bytes() == res2.csv_path.read_bytes()
    assert res1.fingerprint == res2.fingerprint


def test_run_sweep_seed_changes_samples(tmp_path):
    scen = small_sweep_config(methods=("pairwise",))
    res1 = run_sweep(scen, out_dir=tmp_path / "a")
    res2 = run_sweep(scen, out_dir=tmp_path / "b", seed=999)
    assert res1.csv_path.read_bytes() != res2.csv_path.read_bytes()
    assert res1.fingerprint != res2.fingerprint


def test_manifest_recreates_run(tmp_path):
    scen = small_sweep_config()
    res = run_sweep(scen, out_dir=tmp_path / "a")
    manifest = json.loads(res.manifest_path.read_text())
    rebuilt = ScenarioConfig.from_dict(manifest["config"])
    res2 = run_sweep(rebuilt, out_dir=tmp_path / "b")
    assert res.csv_path.read_bytes() == res2.csv_path.read_bytes()
    assert manifest["fingerprint"] == res2.fingerprint
    assert "timings_ms" in manifest and "timestamp" in manifest


def test_run_sweep_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PHOTOCORR_OUT_DIR", str(tmp_path / "envout"))
    res = run_sweep(small_sweep_config(methods=("closed-form",)))
    assert str(res.csv_path).startswith(str(tmp_path / "envout"))


def test_run_sweep_requires_d_grid(tmp_path):
    with pytest.raises(ValidationError):
        run_sweep(small_sweep_config(d_grid=()), out_dir=tmp_path)


def test_run_sweep_driven_steady_exact(tmp_path):
    scen = ScenarioConfig(
        geometry=GeometrySpec(kind="chain", count=2, spacing=0.4),
        protocol="driven-steady-state",
        drive=DriveParams(rabi=5.0),
        methods=("exact",),
        d_grid=(0.4,),
        seed=0,
    )
    res = run_sweep(scen, out_dir=tmp_path)
    assert np.isfinite(res.rows[0].value)
    assert res.rows[0].value >= 0


# -- error scan -------------------------------------------------------------------


def test_crossover_helper():
    n = [3, 4, 5, 6, 7]
    assert _crossover(n, [5, 4, 3, 2, 1], [1, 2, 3, 4, 5]) == pytest.approx(5.0)
    assert _crossover(n, [5, 4, 3, 2.2, 1.8], [0, 0.5, 1, 1.5, 2]) > 6.0
    assert _crossover(n, [0.5, 0.4, 0.3, 0.2, 0.1], [1, 2, 3, 4, 5]) == 3.0


def test_run_error_scan_small(tmp_path):
    cfg = {
        "geometry": {"kind": "chain", "count": 6, "spacing": 0.4},
        "protocol": "inverted-free-decay",
        "flavor": "total",
        "time": 0.0,
        "d_grid": list(np.linspace(0.1, 1.0, 5)),
        "methods": ["pairwise", "m-wise"],
        "sampling": {"m": 3, "samples_pairwise": 400, "samples_mwise": 200},
        "seed": 2718,
        "n_range": [3, 7],
    }
    path = tmp_path / "scan.json"
    path.write_text(json.dumps(cfg))
    res = run_error_scan(path, out_dir=tmp_path)
    for n in range(3, 8):
        for method in ("pairwise", "pairwise-corr", "m-wise", "m-wise-corr"):
            assert (n, method) in res.table
            assert res.table[(n, method)] >= 0
    # pairwise improves with N, m-wise degrades beyond m
    assert res.table[(3, "pairwise")] > res.table[(7, "pairwise")]
    assert res.table[(7, "m-wise")] > res.table[(4, "m-wise")]
    # m = N points reproduce the exact curve
    assert res.table[(3, "m-wise")] < 1e-8
    assert 5.0 <= res.crossover_uncorrected <= 8.5
    lines = res.csv_path.read_text().splitlines()
    assert lines[0] == "n,method,mpe_percent"
    assert len(lines) == 1 + 5 * 4


def test_run_error_scan_rejects_non_chain(tmp_path):
    scen = small_sweep_config(geometry=GeometrySpec(kind="square-lattice", count=3, spacing=0.4))
    with pytest.raises(ValidationError):
        run_error_scan(scen, out_dir=tmp_path)


# -- emission traces ---------------------------------------------------------------


def emission_config(n, m_values, samples, t_max=1.0, points=11):
    return {
        "geometry": {"kind": "chain", "count": n, "spacing": 0.1},
        "protocol": "inverted-free-decay",
        "flavor": "total",
        "time": 0.0,
        "t_grid": list(np.linspace(0.0, t_max, points)),
        "methods": ["exact", "m-wise"],
        "sampling": {"m": max(m_values), "samples_mwise": samples},
        "seed": 99,
        "m_values": m_values,
    }


def test_run_emission_trace_small(tmp_path):
    path = tmp_path / "em.json"
    path.write_text(json.dumps(emission_config(5, [2, 3], samples=20, t_max=0.6, points=7)))
    res = run_emission_trace(path, out_dir=tmp_path)
    assert set(res.traces) == {"exact", "m-wise(m=2)", "m-wise(m=3)"}
    for label, (vals, errs) in res.traces.items():
        assert vals[0] == pytest.approx(1.0, abs=1e-9)
        assert vals.shape == errs.shape == res.t_grid.shape
    # m = 2 keeps single-emitter terms: no superradiant burst
    m2 = res.traces["m-wise(m=2)"][0]
    assert np.all(np.diff(m2) < 1e-9)


def test_run_emission_trace_nine_chain(tmp_path):
    # 9-emitter chain at d = lambda/10: superradiant burst in the exact
    # trace, none at m = 2, and monotone sup-norm convergence with m
    path = tmp_path / "em9.json"
    path.write_text(json.dumps(emission_config(9, [2, 4, 6], samples=25, t_max=1.0, points=9)))
    res = run_emission_trace(path, out_dir=tmp_path)
    exact = res.traces["exact"][0]
    assert exact.max() > 1.0 + 1e-3  # burst before decay
    sup = [
        np.abs(res.traces[f"m-wise(m={m})"][0] - exact).max() for m in (2, 4, 6)
    ]
    assert sup[0] > sup[1] > sup[2]
    m2 = res.traces["m-wise(m=2)"][0]
    assert m2.max() <= 1.0 + 1e-9


def test_run_emission_requires_t_grid(tmp_path):
    scen = small_sweep_config()
    with pytest.raises(ValidationError):
        run_emission_trace(scen, out_dir=tmp_path)


# -- CLI ------------------------------------------------------------------------------


def test_cli_success(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    small_sweep_config(methods=("closed-form",)).to_json(cfg_path)
    code = cli_main(["run", "sweep", str(cfg_path), "--out-dir", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "sweep.csv").exists()


def test_cli_missing_config_is_validation_error(tmp_path):
    assert cli_main(["run", "sweep", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path)]) == 2


def test_cli_invalid_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"geometry": {"kind": "chain", "count": 0}}))
    assert cli_main(["run", "sweep", str(bad), "--out-dir", str(tmp_path)]) == 2


def test_cli_numerical_failure(tmp_path):
    cfg = {
        "geometry": {"kind": "chain", "count": 4, "spacing": 0.4},
        "protocol": "driven-steady-state",
        "drive": {"rabi": 0.0},
        "d_grid": [0.4],
        "methods": ["m-wise"],
        "sampling": {"m": 2, "samples_mwise": 3},
        "seed": 1,
    }
    path = tmp_path / "fail.json"
    path.write_text(json.dumps(cfg))
    assert cli_main(["run", "sweep", str(path), "--out-dir", str(tmp_path)]) == 3


def test_cli_capacity_guard(tmp_path):
    cfg_path = tmp_path / "big.json"
    ScenarioConfig(
        geometry=GeometrySpec(kind="square-lattice", count=4, spacing=0.4),
        protocol="driven-steady-state",
        drive=DriveParams(rabi=2.0),
        methods=("exact",),
        d_grid=(0.4,),
        seed=0,
    ).to_json(cfg_path)
    assert cli_main(["run", "sweep", str(cfg_path), "--out-dir", str(tmp_path)]) == 2
