import numpy as np
import pytest

from core.sewing import (
    Germ, SampledFunction, germ_norm, holder_norm, node_index, pair_lags, sew, sewing_kappa,
    young_integral,
)


def _dyadic_grid(levels: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, 2 ** levels + 1)


@pytest.mark.parametrize("p1, p2, expected", [(1, 2, 2.0 / 3.0), (2, 3, 3.0 / 5.0)])
def test_young_integral_of_monomials(p1, p2, expected):
    t = _dyadic_grid(16)
    result = young_integral(SampledFunction(t, t ** p1), SampledFunction(t, t ** p2),
                            extrapolate=True)
    assert abs(result.path.values[-1] - expected) < 1e-6


def test_sewing_defect_bound_on_dyadic_pairs():
    t = _dyadic_grid(8)
    g = SampledFunction(t, t ** 0.6)
    result = young_integral(g, g, exponents=(0.6, 0.6))
    assert result.kappa == pytest.approx(sewing_kappa(0.2))

    germ = Germ(lambda s, u: g.at(s) * (g.at(u) - g.at(s)), 0.2)
    f = result.path.values
    n = len(t)
    width = 1
    while width <= n - 1:
        s = np.arange(0, n - width, width)
        e = s + width
        gap = np.abs(f[e] - f[s] - germ(t[s], t[e]))
        bound = result.kappa * result.germ_norm_estimate * (t[e] - t[s]) ** 1.2
        assert np.all(gap <= bound + 1e-12)
        width *= 2


def test_additive_germ_is_sewn_exactly():
    t = np.sort(np.random.default_rng(5).uniform(-1.0, 1.0, 50))
    germ = Germ(lambda s, u: np.sin(u) - np.sin(s), 1.0)
    anchor = int(np.argmin(np.abs(t)))
    result = sew(germ, t, 0.25, anchor_index=anchor)
    np.testing.assert_allclose(result.path.values, 0.25 + np.sin(t) - np.sin(t[anchor]),
                               atol=1e-13)
    assert result.path.values[anchor] == 0.25
    assert germ_norm(germ, t, "full") < 1e-9


def test_sewn_paths_from_different_anchors_differ_by_constant():
    t = _dyadic_grid(6)
    g = SampledFunction(t, t ** 2)
    germ = Germ(lambda s, u: g.at(s) * (g.at(u) - g.at(s)), 1.0)
    first = sew(germ, t, 0.0, anchor_index=0).path.values
    second = sew(germ, t, 0.0, anchor_index=37).path.values
    assert np.ptp(first - second) <= 1e-14

    matched = sew(germ, t, first[37], anchor_index=37).path.values
    np.testing.assert_allclose(matched, first, atol=1e-14)


def test_young_integral_of_constant_integrand():
    t = _dyadic_grid(6)
    g2 = SampledFunction(t, np.sin(3.0 * t))
    result = young_integral(SampledFunction(t, np.full(len(t), 1.5)), g2)
    np.testing.assert_allclose(result.path.values, 1.5 * (g2.values - g2.values[0]), atol=1e-13)


def test_young_integral_is_linear_in_integrand():
    t = _dyadic_grid(6)
    g1 = SampledFunction(t, np.sin(t))
    g2 = SampledFunction(t, t ** 2)
    single = young_integral(g1, g2).path.values
    tripled = young_integral(SampledFunction(t, 3.0 * g1.values), g2).path.values
    np.testing.assert_allclose(tripled, 3.0 * single, rtol=1e-12, atol=1e-15)


def test_young_integral_below_threshold_has_no_defect_bound():
    t = _dyadic_grid(4)
    g = SampledFunction(t, np.sqrt(t))
    result = young_integral(g, g, exponents=(0.5, 0.5))
    assert result.kappa == float("inf")
    assert result.defect_bound == float("inf")


def test_holder_norm_of_linear_function():
    t = np.linspace(0.0, 2.0, 33)
    f = SampledFunction(t, 3.0 * t)
    assert holder_norm(f, 1.0) == pytest.approx(3.0)
    assert holder_norm(f, 1.0, "dyadic") == pytest.approx(3.0)


def test_pair_lags_modes():
    np.testing.assert_array_equal(pair_lags(6), [1, 2, 3, 4, 5])
    np.testing.assert_array_equal(pair_lags(9, "dyadic"), [1, 2, 4, 8])
    np.testing.assert_array_equal(pair_lags(9, "full", max_lag=2), [1, 2])
    with pytest.raises(ValueError):
        pair_lags(9, "random")


def test_node_index_requires_exact_nodes():
    t = np.array([0.0, 0.5, 1.0])
    np.testing.assert_array_equal(node_index(t, [1.0, 0.0]), [2, 0])
    with pytest.raises(ValueError):
        node_index(t, [0.25])


@pytest.mark.parametrize("times", [[0.0], [0.0, 1.0, 1.0], [1.0, 0.0]])
def test_sampled_function_rejects_bad_grids(times):
    with pytest.raises(ValueError):
        SampledFunction(np.array(times), np.zeros(len(times)))


def test_germ_requires_positive_alpha():
    with pytest.raises(ValueError):
        Germ(lambda s, t: t - s, 0.0)
