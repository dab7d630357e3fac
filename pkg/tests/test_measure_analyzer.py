import numpy as np
import pytest

from core.exceptions import PointOffCurve
from core.field import degenerate_field, projection_field, shear_field
from analyzers.lsde_solver import SolverConfig, solve
from analyzers.measure_analyzer import (
    CurveMeasure, HBox, area_measure, box_integral, coarea_check, federer_density,
    federer_density_profile, functional_density_check, jacobian_h, sample_rectangle,
    sph_measure_upper,
)
from utils.constants import COAREA_COLUMNS

ORIGIN = np.zeros(3)
UNIT_BOX = HBox.from_bounds([[-0.5, -0.5, -0.5], [0.5, 0.5, 0.5]])
VERTICAL_RADII = [0.08, 0.04, 0.02, 0.01]


@pytest.fixture(scope="module")
def shear_trace():
    return solve(shear_field(), ORIGIN, ORIGIN, SolverConfig(grid_levels=10))


@pytest.mark.parametrize("bounds", [
    [[0.0, 0.0, 0.0], [1.0, 1.0]],
    [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]],
    [[0.0, 0.0, 0.0]],
])
def test_hbox_rejects_bad_bounds(bounds):
    with pytest.raises(ValueError):
        HBox.from_bounds(bounds)


def test_hbox_allows_infinite_bounds():
    box = HBox.from_bounds([[-np.inf, -1.0, 0.0], [np.inf, 1.0, 1.0]])
    assert not box.finite
    assert box.contains([5.0, 0.0, 0.5])


def test_area_measure_counts_parameter_length(shear_trace):
    box = HBox.from_bounds([[-0.05, -1.0, -0.05], [0.05, 1.0, 0.05]])
    assert area_measure(shear_trace, box) == pytest.approx(0.1, rel=1e-9)


def test_area_measure_of_whole_trace(shear_trace):
    box = HBox.from_bounds([[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]])
    assert area_measure(shear_trace, box) == pytest.approx(2.0 * shear_trace.delta, rel=1e-12)


def test_sph_upper_estimate_on_shear_trace(shear_trace):
    assert sph_measure_upper(shear_trace, 0.01, beta=1.0) == pytest.approx(0.4, rel=1e-3)


def test_sph_upper_estimate_requires_positive_mesh(shear_trace):
    with pytest.raises(ValueError):
        sph_measure_upper(shear_trace, 0.0)


def test_box_integral_of_shear_jacobian():
    value = box_integral(lambda x: jacobian_h(shear_field(), x), UNIT_BOX, 16, workers=2)
    assert value == pytest.approx(1.0, rel=1e-12)


def test_curve_measure_total_mass(shear_trace):
    cm = CurveMeasure(shear_trace)
    assert cm.total_mass() == pytest.approx(0.2, rel=1e-12)
    with pytest.raises(ValueError):
        CurveMeasure(shear_trace, theta=np.ones(3))


def test_federer_density_at_center(shear_trace):
    cm = CurveMeasure(shear_trace)
    density = federer_density(cm, ORIGIN, [0.1, 0.05, 0.025], center_samples=32, seed=0)
    assert density == pytest.approx(1.0, abs=0.05)


@pytest.fixture(scope="module")
def vertical_trace():
    return solve(projection_field(), ORIGIN, ORIGIN, SolverConfig(grid_levels=10))


def test_federer_density_on_vertical_line(vertical_trace):
    profile = federer_density_profile(CurveMeasure(vertical_trace), ORIGIN, VERTICAL_RADII,
                                      center_samples=16, seed=0)
    assert list(profile["radius"]) == VERTICAL_RADII
    assert 0.9 <= profile["density"].iloc[-1] <= 1.1


def test_doubling_theta_doubles_density(vertical_trace):
    single = federer_density_profile(CurveMeasure(vertical_trace), ORIGIN, VERTICAL_RADII,
                                     center_samples=16, seed=0)
    theta = np.full(len(vertical_trace), 2.0)
    double = federer_density_profile(CurveMeasure(vertical_trace, theta), ORIGIN, VERTICAL_RADII,
                                     center_samples=16, seed=0)
    np.testing.assert_allclose(double["density"], 2.0 * single["density"], rtol=1e-12)


def test_federer_density_rejects_point_off_curve(shear_trace):
    with pytest.raises(PointOffCurve):
        federer_density(CurveMeasure(shear_trace), [0.3, 0.0, 0.0], [0.1])


def test_sample_rectangle_is_deterministic_and_bounded():
    low, high = np.array([-1.0, 2.0]), np.array([1.0, 3.0])
    for sampler in ("sobol", "halton", "uniform"):
        first = sample_rectangle(low, high, 64, sampler, seed=9)
        np.testing.assert_array_equal(first, sample_rectangle(low, high, 64, sampler, seed=9))
        assert np.all((first >= low) & (first <= high))
    with pytest.raises(ValueError):
        sample_rectangle(low, high, 8, "grid", seed=0)


def test_coarea_on_degenerate_field_skips_every_level():
    report, frame = coarea_check(degenerate_field(), UNIT_BOX, z_samples=8,
                                 measure_cfg={"seed_retries": 4, "quadrature": 8})
    assert report.lhs == 0.0
    assert report.rhs == 0.0
    assert report.skipped == 8
    assert report.rel_error == 0.0
    assert len(frame) == 8
    assert list(frame.columns) == COAREA_COLUMNS


@pytest.mark.slow
def test_coarea_formula_on_shear_field():
    report, _ = coarea_check(shear_field(), UNIT_BOX, z_samples=512,
                             solver_cfg=SolverConfig(grid_levels=8), seed=1)
    assert report.lhs == pytest.approx(1.0, rel=1e-10)
    assert report.rel_error <= 0.03


@pytest.mark.slow
def test_functional_density_approaches_jacobian():
    result = functional_density_check(shear_field(), ORIGIN, [0.5, 0.25], z_samples=256,
                                      solver_cfg=SolverConfig(grid_levels=8), seed=3)
    assert result["target"] == pytest.approx(1.0)
    for row in result["values"]:
        assert row["value"] == pytest.approx(1.0, rel=0.1)
