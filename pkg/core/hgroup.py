"""
Группа Гейзенберга H = R^3 с законом умножения

    (x1, x2, x3) * (y1, y2, y3) = (x1 + y1, x2 + y2, x3 + y3 + x1*y2 - x2*y1),

анизотропными растяжениями delta_r(x) = (r*x1, r*x2, r^2*x3) и
левоинвариантной однородной метрикой d(x, y) = N(x^-1 * y), где
N(z) = (|z^h|^4 + lambda*z3^2)^(1/4).

Все функции принимают как отдельные точки, так и массивы формы (..., 3).
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Union

import numpy as np

from config import METRIC_CONFIG

logger = logging.getLogger(__name__)

SUPPORTED_METRICS = ("koranyi",)


@dataclass(frozen=True)
class HPoint:
    """Точка группы Гейзенберга"""

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"Координата {name} должна быть конечной, получено {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, values) -> "HPoint":
        arr = np.asarray(values, dtype=float)
        if arr.shape != (3,):
            raise ValueError(f"Ожидалась точка из 3 координат, получена форма {arr.shape}")
        return cls(arr[0], arr[1], arr[2])

    @classmethod
    def origin(cls) -> "HPoint":
        return cls(0.0, 0.0, 0.0)

    @property
    def horizontal(self) -> np.ndarray:
        return np.array([self.x1, self.x2])

    @property
    def vertical(self) -> float:
        return self.x3

    def to_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x1, self.x2, self.x3], dtype=dtype if dtype is not None else float)

    def __iter__(self) -> Iterator[float]:
        yield self.x1
        yield self.x2
        yield self.x3

    def __mul__(self, other: "PointLike") -> "HPoint":
        return HPoint.from_array(mul(self, other))

    def inverse(self) -> "HPoint":
        return HPoint(-self.x1, -self.x2, -self.x3)


PointLike = Union[HPoint, np.ndarray, tuple, list]


@dataclass(frozen=True)
class MetricConfig:
    """Параметры калибровки Кораньи"""

    lam: float = METRIC_CONFIG["lambda"]
    name: str = METRIC_CONFIG["name"]

    def __post_init__(self):
        if self.name not in SUPPORTED_METRICS:
            raise ValueError(f"Неизвестная метрика: {self.name}")
        if not np.isfinite(self.lam) or self.lam <= 0:
            raise ValueError(f"lambda должна быть положительной, получено {self.lam}")
        if self.lam > 12:
            logger.warning(
                "При lambda=%s калибровка не удовлетворяет неравенству треугольника "
                "(контрпример x=(1,0,0), y=(0,1,0))", self.lam
            )

    @classmethod
    def from_dict(cls, data: Optional[dict] = None) -> "MetricConfig":
        data = {**METRIC_CONFIG, **(data or {})}
        return cls(lam=float(data["lambda"]), name=data["name"])

    def to_dict(self) -> dict:
        return {"name": self.name, "lambda": self.lam}


@dataclass(frozen=True)
class GeometryConstants:
    """Константы геометрии: эквивалентность калибровок и beta_d"""

    c_equiv: float
    beta_d: float


def as_points(x: PointLike) -> np.ndarray:
    """Приведение точки или набора точек к массиву формы (..., 3)"""
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (3,):
        raise ValueError(f"Последняя ось должна иметь длину 3, получена форма {arr.shape}")
    return arr


def mul(x: PointLike, y: PointLike) -> np.ndarray:
    """Групповое умножение x * y"""
    x = as_points(x)
    y = as_points(y)
    out = x + y
    out[..., 2] += x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0]
    return out


def inv(x: PointLike) -> np.ndarray:
    """Обратный элемент: x^-1 = -x"""
    return -as_points(x)


def dilate(r: float, x: PointLike) -> np.ndarray:
    """Растяжение delta_r(x) = (r*x1, r*x2, r^2*x3)"""
    if r < 0:
        raise ValueError(f"Коэффициент растяжения должен быть неотрицательным, получено {r}")
    return as_points(x) * np.array([r, r, r * r])


def gauge_h(x: PointLike) -> np.ndarray:
    """Горизонтальная калибровка |x^h|"""
    x = as_points(x)
    return np.hypot(x[..., 0], x[..., 1])


def gauge_v(x: PointLike) -> np.ndarray:
    """Вертикальная калибровка |x3|^(1/2)"""
    return np.sqrt(np.abs(as_points(x)[..., 2]))


def norm4(cfg: MetricConfig, z: PointLike) -> np.ndarray:
    """Четвёртая степень нормы: |z^h|^4 + lambda*z3^2"""
    z = as_points(z)
    h2 = z[..., 0] ** 2 + z[..., 1] ** 2
    return h2 * h2 + cfg.lam * z[..., 2] ** 2


def norm(cfg: MetricConfig, z: PointLike) -> np.ndarray:
    """Калибровка Кораньи N(z)"""
    return norm4(cfg, z) ** 0.25


def dist(cfg: MetricConfig, x: PointLike, y: PointLike) -> np.ndarray:
    """Левоинвариантное расстояние d(x, y) = N(x^-1 * y)"""
    return norm(cfg, mul(inv(x), y))


def sample_ball(cfg: MetricConfig, center: PointLike, radius: float, n: int,
                rng: np.random.Generator) -> np.ndarray:
    """
    Выборка n точек в шаре B(radius, center)

    Args:
        cfg: Метрика
        center: Центр шара
        radius: Радиус
        n: Количество точек
        rng: Генератор случайных чисел

    Returns:
        Массив формы (n, 3). Первые k точек совпадают с выборкой размера k
        при том же состоянии генератора.
    """
    return ball_from_uniform(cfg, center, radius, rng.random((n, 3)))


def ball_from_uniform(cfg: MetricConfig, center: PointLike, radius: float,
                      u: np.ndarray) -> np.ndarray:
    """Отображение равномерных чисел из [0, 1)^3 в шар B(radius, center)"""
    rho = np.sqrt(u[:, 0])
    angle = 2.0 * np.pi * u[:, 1]
    height = (2.0 * u[:, 2] - 1.0) * np.sqrt(np.clip(1.0 - rho ** 4, 0.0, None) / cfg.lam)
    unit = np.column_stack([rho * np.cos(angle), rho * np.sin(angle), height])
    return mul(center, dilate(radius, unit))


def equivalence_constant(cfg: MetricConfig, samples: int, seed: int = 0) -> float:
    """
    Оценка наименьшей константы c, при которой
    c^-1 (|z^h| + |z3|^(1/2)) <= d <= c (|z^h| + |z3|^(1/2))

    Пары берутся в единичном шаре; в выборку добавлены чисто горизонтальное
    и чисто вертикальное направления.
    """
    if samples < 1:
        raise ValueError("Количество выборок должно быть положительным")
    rng = np.random.default_rng(seed)
    x = sample_ball(cfg, np.zeros(3), 1.0, samples, rng)
    y = sample_ball(cfg, np.zeros(3), 1.0, samples, rng)
    z = np.vstack([mul(inv(x), y), [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]])

    gauge = gauge_h(z) + gauge_v(z)
    mask = gauge > 0
    ratio = norm(cfg, z[mask]) / gauge[mask]
    c = float(max(ratio.max(), (1.0 / ratio).max(), 1.0))
    logger.debug("Константа эквивалентности: %.6f по %d парам", c, int(mask.sum()))
    return c


def _vertical_slice(cfg: MetricConfig, centers: np.ndarray, sign: float,
                    iterations: int = 200) -> np.ndarray:
    """Конец вертикального отрезка {s: N(y^-1 * (y1, y2, y3 + s)) <= 1} со знаком sign"""
    def level(s):
        shifted = centers.copy()
        shifted[:, 2] += sign * s
        return norm(cfg, mul(inv(centers), shifted)) - 1.0

    lo = np.zeros(len(centers))
    hi = np.full(len(centers), 1.0 / np.sqrt(cfg.lam))
    while np.any(level(hi) < 0):
        hi = np.where(level(hi) < 0, 2.0 * hi, hi)

    # Векторная бисекция по всем центрам одновременно
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        inside = level(mid) <= 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1.0)):
            break
    return sign * lo


def beta_d(cfg: MetricConfig, resolution: int) -> float:
    """
    Максимальная мера Лебега вертикального сечения единичного шара

    Сечение не зависит от y3, поэтому перебираются центры (y1, y2, 0) на
    сетке linspace(-1, 1, 2*resolution + 1), вложенной при удвоении.
    """
    if resolution < 2:
        raise ValueError(f"Разрешение сетки должно быть не меньше 2, получено {resolution}")
    axis = np.linspace(-1.0, 1.0, 2 * resolution + 1)
    y1, y2 = np.meshgrid(axis, axis, indexing="ij")
    centers = np.column_stack([y1.ravel(), y2.ravel(), np.zeros(y1.size)])
    centers = centers[gauge_h(centers) <= 1.0]

    upper = _vertical_slice(cfg, centers, 1.0)
    lower = _vertical_slice(cfg, centers, -1.0)
    value = float(np.max(upper - lower))
    logger.debug("beta_d=%.12f при разрешении %d (%d центров)", value, resolution, len(centers))
    return value


def geometry_constants(cfg: MetricConfig, samples: int = 10000, resolution: int = 32,
                       seed: int = 0) -> GeometryConstants:
    return GeometryConstants(
        c_equiv=equivalence_constant(cfg, samples, seed),
        beta_d=beta_d(cfg, resolution),
    )
