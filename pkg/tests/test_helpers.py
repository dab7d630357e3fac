import numpy as np
import pytest

from utils.helpers import derive_seeds, relative_error, safe_divide, to_serializable


@pytest.mark.parametrize("lhs, rhs, expected", [
    (1.0, 2.0, 0.5),
    (2.0, 1.0, 0.5),
    (0.0, 1.0, 1.0),
    (1.0, 0.0, 1.0),
    (0.0, 0.0, 0.0),
    (-2.0, 2.0, 2.0),
])
def test_relative_error_uses_larger_side(lhs, rhs, expected):
    assert relative_error(lhs, rhs) == pytest.approx(expected)


def test_relative_error_small_values_stay_bounded():
    assert relative_error(0.0, 1e-9) == pytest.approx(1.0)
    assert relative_error(0.0, 1e-15) == pytest.approx(1e-3)


def test_safe_divide_defaults():
    assert safe_divide(1.0, 0.0, default=-1.0) == -1.0
    assert safe_divide(float("nan"), 1.0) == 0.0
    assert safe_divide(3.0, 2.0) == 1.5


def test_derive_seeds_is_deterministic():
    first = [np.random.default_rng(s).random() for s in derive_seeds(5, 3)]
    second = [np.random.default_rng(s).random() for s in derive_seeds(5, 3)]
    assert first == second
    assert len(set(first)) == 3


def test_to_serializable_converts_numpy():
    data = to_serializable({"a": np.float64(1.5), "b": np.arange(3), "c": np.bool_(True)})
    assert data == {"a": 1.5, "b": [0, 1, 2], "c": True}
