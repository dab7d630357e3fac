import numpy as np
import pytest

from core.hgroup import (
    HPoint, MetricConfig, beta_d, dilate, dist, equivalence_constant, gauge_h, gauge_v, inv,
    mul, norm, sample_ball,
)

N_SAMPLES = 100_000


@pytest.fixture
def triples():
    rng = np.random.default_rng(12345)
    return [rng.uniform(-1.0, 1.0, (N_SAMPLES, 3)) for _ in range(3)]


def test_group_law_associativity(triples):
    x, y, z = triples
    np.testing.assert_allclose(mul(mul(x, y), z), mul(x, mul(y, z)), rtol=0, atol=1e-12)


def test_inverse_is_negation():
    x = np.array([0.3, -1.2, 2.5])
    np.testing.assert_allclose(mul(x, inv(x)), np.zeros(3), atol=1e-15)
    assert HPoint(*x).inverse() == HPoint(-0.3, 1.2, -2.5)


def test_distance_left_invariance(triples):
    cfg = MetricConfig()
    g, x, y = triples
    np.testing.assert_allclose(dist(cfg, mul(g, x), mul(g, y)), dist(cfg, x, y), rtol=1e-9)


def test_dilation_homogeneity(triples):
    cfg = MetricConfig()
    _, x, y = triples
    r = 0.37
    np.testing.assert_allclose(dist(cfg, dilate(r, x), dilate(r, y)), r * dist(cfg, x, y),
                               rtol=1e-10)
    np.testing.assert_allclose(dilate(r, mul(x, y)), mul(dilate(r, x), dilate(r, y)), atol=1e-12)


def test_triangle_inequality_default_metric(triples):
    cfg = MetricConfig()
    x, y, z = triples
    lhs = dist(cfg, x, z)
    rhs = dist(cfg, x, y) + dist(cfg, y, z)
    assert np.all(lhs <= rhs + 1e-9)


def test_triangle_inequality_fails_for_lambda_16():
    cfg = MetricConfig(lam=16.0)
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([0.0, 1.0, 0.0])
    assert float(norm(cfg, mul(x, y))) > float(norm(cfg, x) + norm(cfg, y))


def test_vertical_unit_distance_lambda_16():
    cfg = MetricConfig(lam=16.0)
    assert float(dist(cfg, np.zeros(3), [0.0, 0.0, 1.0])) == pytest.approx(2.0, rel=1e-14)


def test_gauges():
    x = np.array([3.0, 4.0, -9.0])
    assert float(gauge_h(x)) == pytest.approx(5.0)
    assert float(gauge_v(x)) == pytest.approx(3.0)


def test_negative_dilation_rejected():
    with pytest.raises(ValueError):
        dilate(-0.5, [1.0, 0.0, 0.0])


def test_non_finite_point_rejected():
    with pytest.raises(ValueError):
        HPoint(0.0, float("nan"), 0.0)


def test_metric_config_validation():
    with pytest.raises(ValueError):
        MetricConfig(lam=-1.0)
    with pytest.raises(ValueError):
        MetricConfig(name="carnot")
    assert MetricConfig.from_dict({"lambda": 2.0}).to_dict() == {"name": "koranyi", "lambda": 2.0}


@pytest.mark.parametrize("lam, expected", [(4.0, 1.0), (16.0, 0.5)])
def test_beta_d(lam, expected):
    assert beta_d(MetricConfig(lam=lam), 16) == pytest.approx(expected, abs=1e-9)


def test_beta_d_requires_resolution_of_two():
    with pytest.raises(ValueError):
        beta_d(MetricConfig(), 1)


def test_beta_d_does_not_decrease_with_resolution():
    cfg = MetricConfig()
    assert beta_d(cfg, 32) >= beta_d(cfg, 16) - 1e-12


def test_equivalence_constant_default_metric():
    c = equivalence_constant(MetricConfig(), 10_000, seed=3)
    assert np.sqrt(2.0) - 1e-12 <= c <= 1.45


def test_sample_ball_stays_inside_and_is_prefix_consistent():
    cfg = MetricConfig()
    center = np.array([0.2, -0.1, 0.4])
    points = sample_ball(cfg, center, 0.3, 500, np.random.default_rng(7))
    assert np.all(dist(cfg, center, points) <= 0.3 * (1.0 + 1e-12))
    prefix = sample_ball(cfg, center, 0.3, 100, np.random.default_rng(7))
    np.testing.assert_array_equal(prefix, points[:100])
