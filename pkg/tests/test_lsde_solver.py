import numpy as np
import pytest

from core.exceptions import DegeneratePoint, NonConvergence
from core.field import degenerate_field, linear_field, projection_field, shear_field
from core.hgroup import MetricConfig, sample_ball
from core.sewing import sewing_kappa
from analyzers.lsde_solver import SolverConfig, admissible_radii, residuals, solve, vertical_error_norm
from analyzers.trace_analyzer import injectivity_check

CFG = SolverConfig(delta=0.1, grid_levels=10)


def _sup_gap(trace, expected):
    return float(np.max(np.abs(trace.path - expected)))


def test_projection_field_traces_vertical_line():
    trace = solve(projection_field(), np.zeros(3), np.zeros(3), CFG)
    expected = np.column_stack([np.zeros(len(trace)), np.zeros(len(trace)), trace.times])
    assert _sup_gap(trace, expected) <= 1e-8
    assert trace.iterations <= 30


def test_shear_field_through_origin():
    trace = solve(shear_field(), np.zeros(3), np.zeros(3), CFG)
    t = trace.times
    expected = np.column_stack([np.zeros_like(t), -t, t])
    assert _sup_gap(trace, expected) <= 1e-8
    assert trace.error_norm <= 1e-10
    assert trace.levelset_drift <= 1e-10
    assert trace.times[trace.center_index] == 0.0


@pytest.mark.parametrize("z1", [-0.3, 0.2])
def test_shear_field_off_center(z1):
    q = np.array([z1, 0.05, -0.02])
    trace = solve(shear_field(), np.zeros(3), q, CFG)
    t = trace.times
    speed = 1.0 / (1.0 + z1)
    expected = np.column_stack([np.full_like(t, z1), q[1] - speed * t, q[2] + speed * t])
    assert _sup_gap(trace, expected) <= 1e-8
    assert trace.error_norm <= 1e-10
    assert trace.levelset_drift <= 1e-10
    assert trace.iterations <= 30
    np.testing.assert_array_equal(trace.path[trace.center_index], q)


def test_residuals_report_matches_trace_fields():
    trace = solve(shear_field(), np.zeros(3), [0.1, 0.0, 0.0], CFG)
    report = residuals(shear_field(), trace)
    assert report["residual_h"] <= 1e-10
    assert report["error_norm"] == pytest.approx(trace.error_norm)


def test_error_norm_from_coordinates_agrees_with_increments():
    trace = solve(shear_field(), np.zeros(3), np.zeros(3), SolverConfig(grid_levels=6))
    stripped = trace.restrict(-1.0, 1.0)
    stripped.vertical_increments = None
    assert vertical_error_norm(stripped) <= 1e-8
    assert vertical_error_norm(trace) <= 1e-10


def test_degenerate_base_point_raises():
    with pytest.raises(DegeneratePoint):
        solve(degenerate_field(), np.zeros(3), np.zeros(3), CFG)
    with pytest.raises(DegeneratePoint):
        admissible_radii(degenerate_field(), np.zeros(3))


def test_non_convergence_after_retries():
    cfg = SolverConfig(grid_levels=6, max_iter=1, halving_retries=1)
    with pytest.raises(NonConvergence):
        solve(shear_field(), np.zeros(3), [0.4, 0.0, 0.0], cfg)


def test_admissible_radii_for_linear_field():
    certificate = admissible_radii(linear_field([[1.0, 0.0], [0.0, 1.0]]), np.zeros(3), seed=0)
    assert certificate.rho0 == 3.0
    assert certificate.eps0 == 0.5
    assert certificate.kappa == pytest.approx(2.0)
    assert certificate.delta0 == pytest.approx(0.99 / 72.0, rel=1e-12)
    assert all(condition["satisfied"] for condition in certificate.conditions.values())


def test_admissible_radii_for_shear_field():
    certificate = admissible_radii(shear_field(), np.zeros(3), seed=0)
    assert 0.0 < certificate.eps0 <= 0.25
    assert certificate.delta0 > 0.0
    assert certificate.rho0 >= np.sqrt(2.0) * certificate.constants.c_equiv
    assert certificate.conditions["contraction"]["value"] < 1.0


def test_random_starts_satisfy_certificate_bounds():
    F = shear_field()
    metric = MetricConfig()
    certificate = admissible_radii(F, np.zeros(3), metric, seed=0)
    starts = sample_ball(metric, np.zeros(3), certificate.eps0, 20, np.random.default_rng(11))
    kappa = sewing_kappa(F.alpha)
    for q in starts:
        trace = solve(F, np.zeros(3), q, CFG, metric, certificate=certificate)
        assert trace.levelset_drift <= 1e-8
        assert trace.holder_h <= certificate.rho0
        assert trace.error_norm <= kappa * certificate.rho0 ** 2
        report = injectivity_check(trace, c_equiv=certificate.constants.c_equiv)
        assert report["holds"]
        assert "outside_eps0" not in trace.flags


def test_outside_eps0_is_flagged():
    F = linear_field([[1.0, 0.0], [0.0, 1.0]])
    certificate = admissible_radii(F, np.zeros(3), seed=0)
    trace = solve(F, np.zeros(3), [0.9, 0.0, 0.0], SolverConfig(grid_levels=5),
                  certificate=certificate, diagnostics=False)
    assert "outside_eps0" in trace.flags


def test_solver_config_grid_has_exact_center():
    cfg = SolverConfig(delta=0.3, grid_levels=4)
    grid = cfg.grid()
    assert len(grid) == cfg.nodes == 17
    assert grid[8] == 0.0
    assert grid[0] == -0.3 and grid[-1] == 0.3


@pytest.mark.parametrize("changes", [{"delta": 0.0}, {"damping": 1.5}, {"error_norm_mode": "x"},
                                     {"grid_levels": 3}])
def test_solver_config_validation(changes):
    with pytest.raises(ValueError):
        SolverConfig(**changes)


def test_trace_restrict_keeps_increments_aligned():
    trace = solve(shear_field(), np.zeros(3), np.zeros(3), SolverConfig(grid_levels=6))
    half = trace.restrict(0.0, trace.delta)
    assert half.times[0] == 0.0
    assert len(half.vertical_increments) == len(half) - 1
    assert vertical_error_norm(half) <= 1e-10
