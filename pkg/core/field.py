"""
Поля F: H -> R^2 класса C^{1,alpha}_h.

Горизонтальный градиент собирается из производных вдоль левоинвариантных
полей X1 = d1 - x2*d3, X2 = d2 + x1*d3, т.е. вдоль правых сдвигов
x * (h, 0, 0) и x * (0, h, 0). Матрица градиента имеет строки по
компонентам F и столбцы по направлениям X1, X2.
"""

import logging
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from config import FIELD_CONFIG, FIELD_NAMES
from core.hgroup import (
    HPoint, MetricConfig, PointLike, as_points, ball_from_uniform, dilate, dist, inv, mul,
    sample_ball,
)

logger = logging.getLogger(__name__)

GRADIENT_MODES = ("analytic", "finite_difference")
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class FieldModel:
    """
    Векторизованное поле F: H -> R^2

    func принимает массив (..., 3) и возвращает (..., 2); gradient (если
    задан) возвращает (..., 2, 2).
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    alpha: float = FIELD_CONFIG["alpha"]
    gradient_mode: str = FIELD_CONFIG["gradient"]
    step: float = FIELD_CONFIG["step"]
    params: Dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha должна лежать в (0, 1], получено {self.alpha}")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"Неизвестный режим градиента: {self.gradient_mode}")
        if self.step <= 0:
            raise ValueError("Шаг конечных разностей должен быть положительным")
        if self.gradient_mode == "analytic" and self.gradient is None:
            object.__setattr__(self, "gradient_mode", "finite_difference")

    def evaluate(self, x: PointLike) -> np.ndarray:
        return np.asarray(self.func(as_points(x)), dtype=float)

    def __call__(self, x: PointLike) -> np.ndarray:
        return self.evaluate(x)

    def grad_h(self, x: PointLike) -> np.ndarray:
        x = as_points(x)
        if self.gradient_mode == "analytic":
            return np.asarray(self.gradient(x), dtype=float)
        return finite_difference_gradient(self.func, x, self.step)

    def with_options(self, **changes) -> "FieldModel":
        return replace(self, **changes)


def finite_difference_gradient(func: Callable, x: np.ndarray, step: float) -> np.ndarray:
    """Центральные разности вдоль правых сдвигов x * (+-h e_i)"""
    columns = []
    for direction in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        forward = np.asarray(func(mul(x, step * direction)))
        backward = np.asarray(func(mul(x, -step * direction)))
        columns.append((forward - backward) / (2.0 * step))
    return np.stack(columns, axis=-1)


def grad_h(F: FieldModel, x: PointLike) -> np.ndarray:
    """Горизонтальный градиент поля в точке (или наборе точек)"""
    return F.grad_h(x)


def taylor_remainder(F: FieldModel, x: PointLike, y: PointLike) -> np.ndarray:
    """Остаток R(x, y) = F(y) - F(x) - grad_h F(x) (x^-1 y)^h"""
    x = as_points(x)
    y = as_points(y)
    shift = (y - x)[..., :2]
    linear = np.einsum("...ij,...j->...i", F.grad_h(x), shift)
    return F.evaluate(y) - F.evaluate(x) - linear


@dataclass(frozen=True)
class HolderEstimate:
    constant: float
    samples: int
    ball_center: Tuple[float, float, float]
    radius: float
    alpha: float


def _operator_norm(matrices: np.ndarray) -> np.ndarray:
    return np.linalg.norm(matrices, ord=2, axis=(-2, -1))


def holder_constant(F: FieldModel, center: PointLike, radius: float, samples: int,
                    seed: int = 0, metric: Optional[MetricConfig] = None) -> HolderEstimate:
    """
    Выборочная оценка sup |grad F(x) - grad F(y)| / d(x, y)^alpha на шаре

    Args:
        F: Поле
        center: Центр шара
        radius: Радиус шара
        samples: Количество пар точек
        seed: Зерно генератора
        metric: Метрика

    Returns:
        HolderEstimate; оценка не убывает по samples при фиксированном seed
    """
    metric = metric or MetricConfig()
    if samples < 1:
        raise ValueError("Количество пар должно быть положительным")
    rng = np.random.default_rng(seed)
    unit = rng.random((samples, 6))
    x = ball_from_uniform(metric, center, radius, unit[:, :3])
    y = ball_from_uniform(metric, center, radius, unit[:, 3:])

    d = dist(metric, x, y)
    mask = d > 0
    diff = _operator_norm(F.grad_h(x[mask]) - F.grad_h(y[mask]))
    ratio = diff / d[mask] ** F.alpha
    constant = float(np.max(ratio)) if ratio.size else 0.0
    return HolderEstimate(constant=constant, samples=samples,
                          ball_center=tuple(as_points(center).tolist()), radius=radius,
                          alpha=F.alpha)


def nondegeneracy(F: FieldModel, p: PointLike, tol: float = DEGENERACY_TOL) -> Dict:
    """Определитель и число обусловленности горизонтального градиента"""
    gradient = F.grad_h(as_points(p))
    det = float(np.linalg.det(gradient))
    singular = np.linalg.svd(gradient, compute_uv=False)
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else float("inf")
    return {"det": det, "condition": condition, "nondegenerate": abs(det) > tol}


def blowup(F: FieldModel, p: PointLike, r: float) -> FieldModel:
    """Раздутие F_{p,r}(q) = (F(p * delta_r q) - F(p)) / r"""
    if r <= 0:
        raise ValueError(f"Радиус раздутия должен быть положительным, получено {r}")
    base = as_points(p).copy()
    value_at_base = F.evaluate(base)

    def func(q):
        return (F.evaluate(mul(base, dilate(r, q))) - value_at_base) / r

    def gradient(q):
        return F.grad_h(mul(base, dilate(r, q)))

    return FieldModel(
        name=f"{F.name}@r={r:g}",
        func=func,
        gradient=gradient,
        alpha=F.alpha,
        gradient_mode="analytic",
        step=F.step,
        params={"base": base.tolist(), "r": r},
    )


def blowup_deviation(F: FieldModel, p: PointLike, r: float, samples: int = 2000,
                     seed: int = 0, metric: Optional[MetricConfig] = None) -> Dict:
    """
    Отклонение раздутия от линеаризации на единичном шаре

    sup_deviation = sup |F_{p,r}(q) - grad F(p) q^h|,
    gradient_deviation = sup |grad F_{p,r}(q) - grad F(p)|,
    gradient_holder = полунорма Гёльдера grad F_{p,r} на единичном шаре.
    Для одинакового seed точки выборки не зависят от r.
    """
    metric = metric or MetricConfig()
    rng = np.random.default_rng(seed)
    q = sample_ball(metric, np.zeros(3), 1.0, samples, rng)
    scaled = blowup(F, p, r)
    linear = F.grad_h(as_points(p))

    value_gap = scaled.evaluate(q) - q[:, :2] @ linear.T
    gradient_gap = _operator_norm(scaled.grad_h(q) - linear)
    holder = holder_constant(scaled, np.zeros(3), 1.0, samples, seed, metric)
    return {
        "r": r,
        "sup_deviation": float(np.max(np.linalg.norm(value_gap, axis=-1))),
        "gradient_deviation": float(np.max(gradient_gap)),
        "gradient_holder": holder.constant,
    }


def taylor_constant_fit(F: FieldModel, center: PointLike, radius: float, samples: int,
                        seed: int = 0, metric: Optional[MetricConfig] = None) -> Dict:
    """
    Подгонка константы в неравенстве |R(x, y)| <= c * H * d(x, y)^(1 + alpha)
    и проверка тождества R(p, y) - R(p, x) = F(y) - F(x) - grad F(p)(x^-1 y)^h
    """
    metric = metric or MetricConfig()
    estimate = holder_constant(F, center, radius, samples, seed, metric)
    rng = np.random.default_rng(seed + 1)
    x = sample_ball(metric, center, radius, samples, rng)
    y = sample_ball(metric, center, radius, samples, rng)
    d = dist(metric, x, y)
    mask = d > 0
    remainder = np.linalg.norm(taylor_remainder(F, x[mask], y[mask]), axis=-1)

    holder = estimate.constant
    if holder > 0:
        fitted = float(np.max(remainder / (holder * d[mask] ** (1.0 + F.alpha))))
    else:
        fitted = 0.0 if np.max(remainder, initial=0.0) <= 1e-12 else float("inf")

    base = as_points(center)
    lhs = taylor_remainder(F, base, y) - taylor_remainder(F, base, x)
    shift = mul(inv(x), y)[:, :2]
    rhs = F.evaluate(y) - F.evaluate(x) - shift @ F.grad_h(base).T
    return {
        "holder_constant": holder,
        "taylor_constant": fitted,
        "identity_error": float(np.max(np.abs(lhs - rhs))),
    }


# Каталог встроенных полей

def projection_field(alpha: float = 1.0) -> FieldModel:
    """F(x) = (x1, x2)"""
    def func(x):
        return x[..., :2].copy()

    def gradient(x):
        return np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy()

    return FieldModel("projection", func, gradient, alpha=alpha)


def linear_field(matrix, alpha: float = 1.0) -> FieldModel:
    """F(x) = M x^h"""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"Матрица линейного поля должна быть 2x2, получена форма {m.shape}")

    def func(x):
        return x[..., :2] @ m.T

    def gradient(x):
        return np.broadcast_to(m, x.shape[:-1] + (2, 2)).copy()

    return FieldModel("linear", func, gradient, alpha=alpha, params={"matrix": m.tolist()})


def shear_field(alpha: float = 1.0) -> FieldModel:
    """F(x) = (x1, x2 + x3), det grad = 1 + x1"""
    def func(x):
        return np.stack([x[..., 0], x[..., 1] + x[..., 2]], axis=-1)

    def gradient(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 0] = -x[..., 1]
        out[..., 1, 1] = 1.0 + x[..., 0]
        return out

    return FieldModel("shear", func, gradient, alpha=alpha)


def vertical_field(alpha: float = 1.0) -> FieldModel:
    """F(x) = (0, x3); градиент (0, 0; -x2, x1) вырожден"""
    def func(x):
        return np.stack([np.zeros(x.shape[:-1]), x[..., 2]], axis=-1)

    def gradient(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 1, 0] = -x[..., 1]
        out[..., 1, 1] = x[..., 0]
        return out

    return FieldModel("vertical", func, gradient, alpha=alpha)


def twisted_field(coefficient: float = 1.0, alpha: float = 1.0) -> FieldModel:
    """F(x) = (x1 + c*x3, x2 + x3)"""
    c = float(coefficient)

    def func(x):
        return np.stack([x[..., 0] + c * x[..., 2], x[..., 1] + x[..., 2]], axis=-1)

    def gradient(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0 - c * x[..., 1]
        out[..., 0, 1] = c * x[..., 0]
        out[..., 1, 0] = -x[..., 1]
        out[..., 1, 1] = 1.0 + x[..., 0]
        return out

    return FieldModel("twisted", func, gradient, alpha=alpha, params={"coefficient": c})


def degenerate_field(alpha: float = 1.0) -> FieldModel:
    """F(x) = (x1, x1), градиент всюду вырожден"""
    def func(x):
        return np.stack([x[..., 0], x[..., 0]], axis=-1)

    def gradient(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., :, 0] = 1.0
        return out

    return FieldModel("degenerate", func, gradient, alpha=alpha)


def perturb(F: FieldModel, G: FieldModel, weight: float) -> FieldModel:
    """Сумма F + w*G с градиентом grad F + w*grad G"""
    def func(x):
        return F.evaluate(x) + weight * G.evaluate(x)

    def gradient(x):
        return F.grad_h(x) + weight * G.grad_h(x)

    return FieldModel(
        name=f"{F.name}+{weight:g}*{G.name}",
        func=func,
        gradient=gradient,
        alpha=min(F.alpha, G.alpha),
        step=F.step,
        params={"weight": weight},
    )


def build_field(field_cfg: Dict) -> FieldModel:
    """Создание поля по секции field конфигурации"""
    cfg = {**FIELD_CONFIG, **field_cfg}
    name = cfg.get("name")
    if name not in FIELD_NAMES:
        raise ValueError(f"Неизвестное поле: {name}")

    alpha = float(cfg["alpha"])
    if name == "projection":
        model = projection_field(alpha)
    elif name == "linear":
        if cfg.get("matrix") is None:
            raise ValueError("Для поля linear требуется field.matrix")
        model = linear_field(cfg["matrix"], alpha)
    elif name == "shear":
        model = shear_field(alpha)
    elif name == "vertical":
        model = vertical_field(alpha)
    elif name == "twisted":
        model = twisted_field(cfg["coefficient"], alpha)
    else:
        model = degenerate_field(alpha)

    model = model.with_options(gradient_mode=cfg["gradient"], step=float(cfg["step"]))
    logger.debug("Поле %s: alpha=%s, градиент=%s", model.name, model.alpha, model.gradient_mode)
    return model


def point_from_config(value, name: str) -> HPoint:
    """Точка p или q из конфигурации"""
    if value is None:
        return HPoint.origin()
    try:
        return HPoint.from_array(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Некорректная точка {name}: {e}") from e
