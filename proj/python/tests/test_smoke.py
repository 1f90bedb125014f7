import csv
import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import bmsim

SOURCE_DIR = Path(os.environ.get("BMSIM_SOURCE_DIR", Path(__file__).resolve().parents[2]))
EXACT = {"kind": "ExactIncrement", "horizon": 1.0, "steps": 64}


def test_simulate_shape_and_start():
    paths = bmsim.simulate(EXACT, seed=3, count=10)
    assert paths.shape == (10, 65)
    assert np.all(paths[:, 0] == 0.0)
    times = bmsim.grid_times(EXACT)
    assert times[0] == 0.0 and times[-1] == 1.0 and len(times) == 65


def test_simulate_is_reproducible_and_worker_independent():
    a = bmsim.simulate(EXACT, seed=11, count=500, workers=1)
    b = bmsim.simulate(EXACT, seed=11, count=500, workers=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, bmsim.simulate(EXACT, seed=12, count=500))
    # Path i does not depend on how many paths are requested.
    assert np.array_equal(a[:7], bmsim.simulate(EXACT, seed=11, count=7))


def test_endpoint_moments():
    paths = bmsim.simulate(EXACT, seed=5, count=20000)
    end = paths[:, -1]
    assert abs(end.mean()) < 0.03
    assert abs(end.var() - 1.0) < 0.05


def test_bridge_returns_to_start():
    bridge = bmsim.simulate({"kind": "BrownianBridge", "horizon": 1, "steps": 32}, seed=1, count=50)
    assert np.allclose(bridge[:, -1], 0.0, atol=1e-12)


def test_functionals_on_arrays():
    path = np.array([[0.0, 0.5, 1.2]])
    assert bmsim.evaluate("value_at", path, horizon=1.0, t=0.75)[0] == pytest.approx(0.85)
    assert bmsim.evaluate("running_max", path, horizon=1.0, t=1.0)[0] == pytest.approx(1.2)
    assert math.isnan(bmsim.evaluate("first_hitting_time", path, horizon=1.0, a=3.0)[0])
    assert "local_time_tanaka" in bmsim.functional_names()
    with pytest.raises(bmsim.ConfigError):
        bmsim.evaluate("no_such_functional", path, horizon=1.0)


def test_laws():
    assert bmsim.law("arcsine_cdf", s=0.5) == pytest.approx(0.5, abs=1e-15)
    assert bmsim.law("normal_cdf", x=0.0) == pytest.approx(0.5, abs=1e-15)
    assert bmsim.law("max_cdf_complement", a=1, t=1) == pytest.approx(2 * (1 - bmsim.law("normal_cdf", x=1)))
    assert "levy_modulus" in bmsim.law_names()
    with pytest.raises(bmsim.DomainError):
        bmsim.law("levy_modulus", delta=2.0)
    with pytest.raises(bmsim.ConfigError):
        bmsim.law("hitting_cdf", a=1.0)


def test_ks_test():
    end = bmsim.simulate(EXACT, seed=21, count=5000)[:, -1]
    report = bmsim.ks_test(end, "normal", alpha=0.01)
    assert report["passed"] and report["sample_size"] == 5000
    shifted = bmsim.ks_test(end + 0.2, "normal", alpha=0.01)
    assert not shifted["passed"]
    with pytest.raises(bmsim.DomainError):
        bmsim.ks_test(end[:49], "normal")


def test_run_experiment_writes_outputs(tmp_path):
    config = json.loads((SOURCE_DIR / "configs" / "smoke.json").read_text())
    reports = bmsim.run_experiment(config, tmp_path, workers=2, paths_to_write=2)
    assert [r["test_name"] for r in reports] == ["endpoint_normal", "endpoint_variance", "max_tail"]
    assert all(r["passed"] for r in reports)
    for name in ("manifest.json", "functionals.csv", "reports.jsonl", "summary.csv", "paths/path_000001.csv"):
        assert (tmp_path / name).exists(), name
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["master_seed"] == 1 and manifest["count"] == 2000
    with open(tmp_path / "paths" / "path_000000.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "value"] and len(rows) == 258
    assert bmsim.run_experiment(config) == reports


def test_bad_config_is_reported():
    with pytest.raises(bmsim.ConfigError, match="replications"):
        bmsim.run_experiment({"schema_version": 1, "experiment_name": "x", "generator": EXACT,
                              "replications": 0, "master_seed": 1})
    with pytest.raises(bmsim.ConfigError, match="power of two"):
        bmsim.simulate({"kind": "DyadicRefine", "horizon": 1, "steps": 48}, seed=1, count=1)


def test_emit_law_table(tmp_path):
    out = tmp_path / "arcsine.csv"
    bmsim.emit_law_table("arcsine_cdf", "s=0:1:3", out)
    lines = out.read_text().splitlines()
    assert lines[0] == "s,value" and len(lines) == 4
    with pytest.raises(bmsim.DomainError):
        bmsim.emit_law_table("hitting_density", "a=1;T=0", tmp_path / "bad.csv")
    assert not (tmp_path / "bad.csv").exists()
