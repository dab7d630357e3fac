import numpy as np
import pytest

from core.exceptions import NotFound
from core.field import blowup, linear_field, perturb, shear_field, twisted_field, vertical_field
from core.hgroup import MetricConfig
from analyzers.lsde_solver import SolverConfig, solve
from analyzers.trace_analyzer import (
    TraceAnalyzer, injectivity_check, modulus_check, project_point, snap_to_level,
    stability_run, surjectivity_check, uniqueness_check,
)

ORIGIN = np.zeros(3)


@pytest.fixture(scope="module")
def shear_trace():
    return solve(shear_field(), ORIGIN, ORIGIN, SolverConfig(grid_levels=10))


def test_injectivity_holds_on_exact_trace(shear_trace):
    report = injectivity_check(shear_trace)
    assert report["holds"]
    assert report["margin"] >= 1.0
    assert report["max_lag"] == len(shear_trace) - 1


def test_modulus_of_exact_trace(shear_trace):
    report = modulus_check(shear_trace)
    assert report["holder_h"] == pytest.approx(1.0, rel=1e-9)
    assert np.isfinite(report["holder_d_half"])


def test_project_point_recovers_parameter(shear_trace):
    tau = 0.0371
    result = project_point(shear_trace, [0.0, -tau, tau])
    assert result["t"] == pytest.approx(tau, abs=1e-9)


def test_project_point_returns_zero_for_horizontal_points(shear_trace):
    assert project_point(shear_trace, [0.2, 0.1, 0.0])["t"] == 0.0


def test_project_point_raises_without_sign_change(shear_trace):
    with pytest.raises(NotFound):
        project_point(shear_trace, [0.0, 0.0, 5.0])


def test_snap_to_level_lands_on_level_set():
    F = twisted_field(0.5)
    point, residual = snap_to_level(F, np.array([0.1, 0.2, 0.05]), np.zeros(2))
    assert residual < 1e-10
    np.testing.assert_allclose(F.evaluate(point), 0.0, atol=1e-10)


def test_surjectivity_gap_halves_when_levels_grow_by_two():
    F = shear_field()
    gaps = []
    for levels in (8, 10):
        trace = solve(F, ORIGIN, ORIGIN, SolverConfig(grid_levels=levels), diagnostics=False)
        report = surjectivity_check(F, trace, eps=0.2, samples=200, seed=4)
        assert report["accepted"] == 200
        assert report["max_gap"] <= 3.0 * np.sqrt(trace.mesh)
        gaps.append(report["max_gap"])
    assert 0.35 <= gaps[1] / gaps[0] <= 0.65


def test_uniqueness_on_exact_trace():
    report = uniqueness_check(shear_field(), ORIGIN, ORIGIN, SolverConfig(grid_levels=8),
                              SolverConfig(grid_levels=12))
    assert report["sup_distance"] <= 1e-6
    assert report["nodes_compared"] == 257
    assert report["reparametrization_gap"] <= report["fine_mesh"]


def test_uniqueness_on_nonlinear_field():
    coarse = SolverConfig(grid_levels=8)
    q = np.array([0.05, -0.03, 0.01])
    report = uniqueness_check(twisted_field(), ORIGIN, q, coarse, SolverConfig(grid_levels=12))
    assert report["sup_distance"] <= 10.0 * (2.0 * coarse.delta / 2 ** coarse.grid_levels)


def test_uniqueness_does_not_depend_on_damping():
    q = np.array([0.05, -0.03, 0.01])
    plain = SolverConfig(grid_levels=8, tol=1e-13, max_iter=200)
    damped = SolverConfig(grid_levels=8, tol=1e-13, max_iter=200, damping=0.5)
    report = uniqueness_check(twisted_field(), ORIGIN, q, plain, damped)
    assert report["nodes_compared"] == 257
    assert report["sup_distance"] <= 1e-6


def test_stability_distances_scale_with_perturbation():
    F = shear_field()
    cfg = SolverConfig(grid_levels=8)
    ns = (4, 16, 64)
    fields = [perturb(F, vertical_field(), 1.0 / n) for n in ns]
    rows = stability_run(fields, F, ORIGIN, ORIGIN, cfg, MetricConfig())
    assert all(row["converged"] for row in rows)
    for row, n in zip(rows, ns):
        assert row["sup_distance"] == pytest.approx(cfg.delta / n, rel=1e-6)
    distances = [row["sup_distance"] for row in rows]
    assert all(a >= 2.0 * b for a, b in zip(distances, distances[1:]))


def test_trace_analyzer_passes_exact_trace(shear_trace):
    analyzer = TraceAnalyzer(shear_field(), shear_trace, SolverConfig(grid_levels=10),
                             thresholds={"surjectivity_samples": 200})
    summary = analyzer.get_summary_metrics(seed=0)
    assert summary["passed"], summary["failed"]
    assert set(summary["checks"]) == {"residuals", "injectivity", "modulus", "surjectivity",
                                      "uniqueness"}


def test_trace_analyzer_flags_corrupted_node(shear_trace):
    corrupted = shear_trace.restrict(-1.0, 1.0)
    corrupted.path = corrupted.path.copy()
    corrupted.path[100, 0] += 0.01
    corrupted.vertical_increments = None
    analysis = TraceAnalyzer(shear_field(), corrupted).get_residual_analysis()
    assert not analysis["passed"]
    assert analysis["residual_h"] >= 0.01 - 1e-12


def test_stability_along_blowup_sequence():
    F = shear_field()
    cfg = SolverConfig(grid_levels=8)
    radii = (0.25, 0.0625, 0.015625)
    limit = linear_field(F.grad_h(ORIGIN))
    rows = stability_run([blowup(F, ORIGIN, r) for r in radii], limit, ORIGIN, ORIGIN, cfg)
    assert all(row["converged"] for row in rows)
    for row, r in zip(rows, radii):
        assert row["sup_distance"] == pytest.approx(r * cfg.delta, rel=1e-6)
