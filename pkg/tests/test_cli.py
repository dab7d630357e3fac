import json

import numpy as np
import pandas as pd
import pytest

from app import main

SOLVER = {"grid_levels": 8}


def _write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


def _run(tmp_path, command, config, out="run", extra=()):
    path = _write_config(tmp_path, config)
    return main([command, "--config", str(path), "--out", str(tmp_path / out), "-q", *extra])


def test_trace_command_writes_exact_solution(tmp_path):
    status = _run(tmp_path, "trace", {"field": {"name": "shear"}, "solver": SOLVER})
    assert status == 0
    frame = pd.read_csv(tmp_path / "run" / "trace.csv")
    t = frame["t"].to_numpy()
    expected = np.column_stack([np.zeros_like(t), -t, t])
    assert np.max(np.abs(frame[["x1", "x2", "x3"]].to_numpy() - expected)) <= 1e-8

    diagnostics = json.loads((tmp_path / "run" / "diagnostics.json").read_text())
    assert diagnostics["converged"]
    assert diagnostics["certificate"]["eps0"] > 0


def test_manifest_lists_file_hashes(tmp_path):
    assert _run(tmp_path, "trace", {"field": {"name": "shear"}, "solver": SOLVER}) == 0
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["command"] == "trace"
    assert manifest["status"] == 0
    assert {"trace.csv", "diagnostics.json", "config.json", "summary.md"} <= set(manifest["files"])
    assert all(len(digest) == 64 for digest in manifest["files"].values())


def test_manifest_ignores_files_from_earlier_runs(tmp_path):
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    (run_dir / "stale.csv").write_text("t,x1,x2,x3\n", encoding="utf-8")
    config = {"field": {"name": "shear"}, "solver": SOLVER}
    assert _run(tmp_path, "trace", config, extra=("--figures",)) == 0
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert "stale.csv" not in manifest["files"]
    assert {"trace.csv", "config.json", "summary.md", "figures/trace.json"} <= set(manifest["files"])
    assert (run_dir / "figures" / "trace.json").exists()


def test_degenerate_field_exits_with_failure(tmp_path):
    assert _run(tmp_path, "trace", {"field": {"name": "degenerate"}, "solver": SOLVER}) == 2


@pytest.mark.parametrize("config", [
    {"solver": SOLVER},
    {"field": {"name": "shear"}, "colour": "red"},
    {"field": {"name": "shear"}, "solver": {"grid_levels": 0}},
])
def test_invalid_config_exits_with_3(tmp_path, config):
    assert _run(tmp_path, "trace", config) == 3


def test_unreadable_config_exits_with_3(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{")
    assert main(["beta", "--config", str(path), "-q"]) == 3


def _exact_trace_csv(path, corrupt=False):
    t = np.linspace(-0.1, 0.1, 257)
    frame = pd.DataFrame({"t": t, "x1": 0.0, "x2": -t, "x3": t})
    if corrupt:
        frame.loc[100, "x1"] = 0.01
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def test_verify_accepts_exact_trace_file(tmp_path):
    trace_file = _exact_trace_csv(tmp_path / "exact.csv")
    config = {"field": {"name": "shear"}, "solver": SOLVER,
              "verify": {"trace_file": str(trace_file), "surjectivity_samples": 100}}
    assert _run(tmp_path, "verify", config) == 0
    report = json.loads((tmp_path / "run" / "verify.json").read_text())
    assert report["passed"]


def test_verify_rejects_corrupted_trace_file(tmp_path):
    trace_file = _exact_trace_csv(tmp_path / "corrupt.csv", corrupt=True)
    config = {"field": {"name": "shear"}, "solver": SOLVER,
              "verify": {"trace_file": str(trace_file), "surjectivity_samples": 100}}
    assert _run(tmp_path, "verify", config) == 2
    report = json.loads((tmp_path / "run" / "verify.json").read_text())
    assert "residuals" in report["failed"]


def test_verify_with_empty_trace_file_exits_with_3(tmp_path):
    trace_file = tmp_path / "empty.csv"
    trace_file.write_text("")
    config = {"field": {"name": "shear"}, "verify": {"trace_file": str(trace_file)}}
    assert _run(tmp_path, "verify", config) == 3


def test_beta_for_large_lambda(tmp_path):
    config = {"metric": {"lambda": 16.0}, "beta": {"resolutions": [16, 32]},
              "radii": {"equivalence_samples": 1000}}
    assert _run(tmp_path, "beta", config) == 0
    report = json.loads((tmp_path / "run" / "beta.json").read_text())
    assert report["metric"]["lambda"] == 16.0
    assert all(row["beta_d"] >= 0.5 - 1e-9 for row in report["beta_d"])


def test_beta_runs_are_deterministic(tmp_path):
    config = {"beta": {"resolutions": [16]}, "radii": {"equivalence_samples": 2000}}
    assert _run(tmp_path, "beta", config, out="first") == 0
    assert _run(tmp_path, "beta", config, out="second") == 0
    first = (tmp_path / "first" / "beta.json").read_bytes()
    assert first == (tmp_path / "second" / "beta.json").read_bytes()


def test_seed_override_is_recorded(tmp_path):
    config = {"beta": {"resolutions": [16]}, "radii": {"equivalence_samples": 500}}
    assert _run(tmp_path, "beta", config, extra=("--seed", "7")) == 0
    assert json.loads((tmp_path / "run" / "config.json").read_text())["seed"] == 7


def test_blowup_deviation_decreases(tmp_path):
    config = {"field": {"name": "shear"}, "solver": SOLVER, "blowup": {"samples": 200}}
    assert _run(tmp_path, "blowup", config) == 0
    frame = pd.read_csv(tmp_path / "run" / "blowup.csv")
    assert list(frame.columns) == ["r", "sup_deviation", "gradient_deviation"]
    deviation = frame["sup_deviation"].to_numpy()
    assert np.all(np.diff(deviation) < 0)

    report = json.loads((tmp_path / "run" / "blowup.json").read_text())
    distances = [row["sup_distance"] for row in report["stability"]]
    assert [row["n"] for row in report["stability"]] == [4, 16, 64]
    assert all(a > b for a, b in zip(distances, distances[1:]))
    assert report["functional"] is None


def test_area_command_on_shear(tmp_path):
    config = {"field": {"name": "shear"}, "area": {"meshes": [0.01], "radii": [0.04, 0.02]},
              "measure": {"center_samples": 8}}
    assert _run(tmp_path, "area", config) == 0
    report = json.loads((tmp_path / "run" / "area.json").read_text())
    assert report["area_measure"] == pytest.approx(0.1, rel=1e-9)
    assert report["sph_upper"][0]["sph_upper"] == pytest.approx(0.4, rel=1e-2)
    assert (tmp_path / "run" / "density_profile.csv").is_file()


@pytest.mark.slow
def test_coarea_command_on_shear(tmp_path):
    config = {"field": {"name": "shear"}, "solver": SOLVER, "measure": {"z_samples": 512}}
    assert _run(tmp_path, "coarea", config) == 0
    report = json.loads((tmp_path / "run" / "coarea.json").read_text())
    assert report["lhs"] == pytest.approx(1.0, rel=1e-10)
    assert report["rel_error"] <= 0.03
    samples = pd.read_csv(tmp_path / "run" / "coarea_samples.csv")
    assert list(samples.columns) == ["z1", "z2", "contribution"]
    assert len(samples) == 512
