"""
Меры на кривых уровня: длина в ящиках, верхняя оценка сферической меры
Хаусдорфа, плотность Федерера, проверка формулы коплощади

    int_box J_h F dx = int_{R^2} S^2(F^-1(z) ∩ box) dz

и её функциональный вариант для раздутий поля.
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid
from scipy.stats import qmc

from config import MEASURE_CONFIG
from core.exceptions import LSDEError, PointOffCurve, SeedNotFound
from core.field import FieldModel, blowup
from core.hgroup import MetricConfig, PointLike, as_points, beta_d, dist, inv, mul, norm, norm4, sample_ball
from analyzers.lsde_solver import SolverConfig, Trace, solve
from analyzers.trace_analyzer import snap_to_level
from utils.constants import COAREA_COLUMNS, PROFILE_COLUMNS
from utils.helpers import derive_seeds, relative_error

logger = logging.getLogger(__name__)

SAMPLERS = ("sobol", "halton", "uniform")


@dataclass(frozen=True)
class HBox:
    """Координатный ящик [lower, upper] в R^3 (границы могут быть бесконечными)"""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != (3,) or upper.shape != (3,):
            raise ValueError("Границы ящика должны содержать по 3 координаты")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise ValueError(f"Некорректные границы ящика: {lower.tolist()}, {upper.tolist()}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[float]]) -> "HBox":
        if len(bounds) != 2:
            raise ValueError("Ящик задаётся парой [нижняя граница, верхняя граница]")
        return cls(np.asarray(bounds[0], dtype=float), np.asarray(bounds[1], dtype=float))

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = as_points(points)
        return np.all((points >= self.lower) & (points <= self.upper), axis=-1)

    def to_list(self) -> List[List[float]]:
        return [self.lower.tolist(), self.upper.tolist()]


@dataclass
class MeasureReport:
    """Сравнение двух сторон формулы коплощади"""

    lhs: float
    rhs: float
    rel_error: float
    samples: int
    seed: int
    standard_error: float = float("nan")
    skipped: int = 0
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "rel_error": self.rel_error,
            "samples": self.samples,
            "seed": self.seed,
            "standard_error": self.standard_error,
            "skipped": self.skipped,
            **self.details,
        }


def jacobian_h(F: FieldModel, x: PointLike) -> np.ndarray:
    """Горизонтальный якобиан J_h F = |det grad_h F|"""
    return np.abs(np.linalg.det(F.grad_h(as_points(x))))


def _segment_weights(theta: Optional[np.ndarray], n: int) -> np.ndarray:
    if theta is None:
        return np.ones(n - 1)
    weight = np.abs(theta)
    return 0.5 * (weight[:-1] + weight[1:])


def _box_length(times: np.ndarray, path: np.ndarray, box: HBox,
                theta: Optional[np.ndarray] = None) -> float:
    """Параметрическая длина отрезков кривой внутри ящика (отсечение Лианга-Барски)"""
    start = path[:-1]
    direction = path[1:] - path[:-1]
    inside = (start >= box.lower) & (start <= box.upper)
    moving = direction != 0

    with np.errstate(divide="ignore", invalid="ignore"):
        t_low = (box.lower - start) / direction
        t_high = (box.upper - start) / direction
    enter = np.where(moving, np.minimum(t_low, t_high), np.where(inside, -np.inf, np.inf))
    leave = np.where(moving, np.maximum(t_low, t_high), np.where(inside, np.inf, -np.inf))

    first = np.maximum(0.0, enter.max(axis=1))
    last = np.minimum(1.0, leave.min(axis=1))
    fraction = np.clip(last - first, 0.0, 1.0)
    return float(np.sum(fraction * np.diff(times) * _segment_weights(theta, len(times))))


def area_measure(trace: Trace, box: HBox) -> float:
    """Мера (gamma)_# L^1 ящика: длина параметров t с gamma_t в ящике"""
    return _box_length(trace.times, trace.path, box)


def _arc_points(trace: Trace, lower: float, upper: float) -> np.ndarray:
    inner = (trace.times > lower) & (trace.times < upper)
    ends = trace.interpolate(np.array([lower, upper]))
    return np.vstack([ends[:1], trace.path[inner], ends[1:]])


def sph_measure_upper(trace: Trace, mesh: float, beta: Optional[float] = None,
                      resolution: int = 32) -> float:
    """
    Верхняя оценка сферической меры: сумма beta_d * diam^2 по дугам длины mesh

    Returns:
        0 для кривой, вырожденной в точку
    """
    if mesh <= 0:
        raise ValueError("Шаг разбиения должен быть положительным")
    beta = beta_d(trace.metric, resolution) if beta is None else beta
    start, end = float(trace.times[0]), float(trace.times[-1])
    edges = np.append(np.arange(start, end, mesh), end)
    edges = edges[np.concatenate([[True], np.diff(edges) > 0])]

    total = 0.0
    for lower, upper in zip(edges[:-1], edges[1:]):
        points = _arc_points(trace, lower, upper)
        distances = dist(trace.metric, points[:, None, :], points[None, :, :])
        total += beta * float(np.max(distances)) ** 2
    return total


class CurveMeasure:
    """Мера gamma_#(theta L^1) на решении LSDE"""

    def __init__(self, trace: Trace, theta: Optional[np.ndarray] = None,
                 refine: int = MEASURE_CONFIG["refine"]):
        self.trace = trace
        self.metric = trace.metric
        self.refine = refine
        if theta is None:
            theta = np.ones(len(trace))
        self.theta = np.asarray(theta, dtype=float)
        if self.theta.shape != (len(trace),):
            raise ValueError("Плотность theta должна быть задана во всех узлах кривой")
        self._segment_diameter = float(np.max(
            dist(self.metric, trace.path[:-1], trace.path[1:])
        ))

    def total_mass(self) -> float:
        return float(trapezoid(np.abs(self.theta), self.trace.times))

    def pushforward_box(self, box: HBox) -> float:
        return _box_length(self.trace.times, self.trace.path, box, self.theta)

    def pushforward_ball(self, center: PointLike, radius: float) -> float:
        """Мера шара B(radius, center): доля отрезков с N(center^-1 gamma_t) <= radius"""
        if radius <= 0:
            raise ValueError("Радиус шара должен быть положительным")
        times, path = self.trace.times, self.trace.path
        center = as_points(center)
        near = np.nonzero(dist(self.metric, center, path) <= radius + self._segment_diameter)[0]
        if near.size == 0:
            return 0.0
        lo = max(int(near.min()) - 1, 0)
        hi = min(int(near.max()) + 1, len(times) - 1)
        if hi == lo:
            return 0.0

        spacing = radius ** 2 / self.refine
        steps = np.diff(times[lo:hi + 1])
        sub = int(min(max(1, np.ceil(steps.max() / spacing)), 256))
        fraction = np.arange(sub) / sub
        fine_t = (times[lo:hi, None] + steps[:, None] * fraction[None, :]).ravel()
        fine_t = np.append(fine_t, times[hi])

        points = self.trace.interpolate(fine_t)
        level = radius ** 4 - norm4(self.metric, mul(inv(center), points))
        weight = np.interp(fine_t, times, np.abs(self.theta))
        return _sublevel_length(fine_t, level, weight)


def _sublevel_length(times: np.ndarray, level: np.ndarray, weight: np.ndarray) -> float:
    """Длина множества {level >= 0} при линейной интерполяции level по отрезкам"""
    g0, g1 = level[:-1], level[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        crossing = np.where(g0 >= 0, g0 / (g0 - g1), g1 / (g1 - g0))
    fraction = np.where((g0 >= 0) & (g1 >= 0), 1.0,
                        np.where((g0 < 0) & (g1 < 0), 0.0, crossing))
    mean_weight = 0.5 * (weight[:-1] + weight[1:])
    return float(np.sum(np.clip(fraction, 0.0, 1.0) * np.diff(times) * mean_weight))


def _check_on_curve(cm: CurveMeasure, x: np.ndarray, tol: float) -> None:
    gap = float(np.min(dist(cm.metric, x, cm.trace.path)))
    if gap > tol:
        raise PointOffCurve(f"Точка {x.tolist()} удалена от кривой на {gap:.3e}")


def federer_density_profile(cm: CurveMeasure, x: PointLike, radii: Sequence[float],
                            center_samples: int = MEASURE_CONFIG["center_samples"],
                            seed: int = 0, beta: Optional[float] = None,
                            tol: float = 1e-9) -> pd.DataFrame:
    """
    Отношения mu(B(rho, y)) / (beta_d rho^2) по шарам, содержащим x

    Центры: сама точка x и center_samples точек из B(rho, x); для всех
    радиусов используется одна и та же выборка в единичном шаре.
    """
    x = as_points(x)
    _check_on_curve(cm, x, tol)
    beta = beta_d(cm.metric, 32) if beta is None else beta

    rows = []
    for radius in sorted(radii, reverse=True):
        rng = np.random.default_rng(seed)
        centers = np.vstack([x[None, :], sample_ball(cm.metric, x, radius, center_samples, rng)])
        ratios = [cm.pushforward_ball(center, radius) / (beta * radius ** 2) for center in centers]
        rows.append({"radius": radius, "density": float(np.max(ratios))})
        logger.debug("Плотность при rho=%.4g: %.6f", radius, rows[-1]["density"])
    return pd.DataFrame(rows, columns=PROFILE_COLUMNS)


def federer_density(cm: CurveMeasure, x: PointLike, radii: Sequence[float],
                    center_samples: int = MEASURE_CONFIG["center_samples"], seed: int = 0,
                    beta: Optional[float] = None, tol: float = 1e-9) -> float:
    """
    Плотность Федерера в точке x: линейная экстраполяция профиля к rho = 0
    (при одном радиусе возвращается значение на нём)
    """
    profile = federer_density_profile(cm, x, radii, center_samples, seed, beta, tol)
    return extrapolate_density(profile)


def extrapolate_density(profile: pd.DataFrame) -> float:
    if len(profile) < 2:
        return float(profile["density"].iloc[0])
    slope, intercept = np.polyfit(profile["radius"], profile["density"], 1)
    return float(intercept)


def _legendre_grid(box: HBox, quadrature: int):
    nodes, weights = leggauss(quadrature)
    half = 0.5 * (box.upper - box.lower)
    axes = [box.center[k] + half[k] * nodes for k in range(3)]
    scaled = [half[k] * weights for k in range(3)]
    return axes, scaled


def box_integral(func: Callable[[np.ndarray], np.ndarray], box: HBox, quadrature: int,
                 workers: int = 1) -> float:
    """Интеграл по ящику тензорной квадратурой Гаусса-Лежандра, по слоям x1"""
    if not box.finite:
        raise ValueError("Квадратура требует конечного ящика")
    axes, weights = _legendre_grid(box, quadrature)
    x2, x3 = np.meshgrid(axes[1], axes[2], indexing="ij")
    w23 = np.outer(weights[1], weights[2])

    def slab(i: int) -> float:
        points = np.stack([np.full(x2.shape, axes[0][i]), x2, x3], axis=-1)
        return weights[0][i] * float(np.sum(func(points) * w23))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return float(sum(pool.map(slab, range(quadrature))))


def image_rectangle(F: FieldModel, box: HBox, grid: int = MEASURE_CONFIG["image_grid"],
                    padding: float = MEASURE_CONFIG["image_padding"]) -> Tuple[np.ndarray, np.ndarray]:
    """Прямоугольник, содержащий F(box), по значениям на равномерной сетке"""
    axes = [np.linspace(box.lower[k], box.upper[k], grid) for k in range(3)]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    values = F.evaluate(points)
    low, high = values.min(axis=0), values.max(axis=0)
    pad = padding * np.maximum(high - low, 1e-12)
    return low - pad, high + pad


def sample_rectangle(low: np.ndarray, high: np.ndarray, n: int, sampler: str,
                     seed: int) -> np.ndarray:
    """Точки в прямоугольнике: scrambled Sobol, Halton или равномерные"""
    if sampler not in SAMPLERS:
        raise ValueError(f"Неизвестный генератор выборки: {sampler}")
    if sampler == "sobol":
        engine = qmc.Sobol(d=2, scramble=True, seed=seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            unit = engine.random(n)
    elif sampler == "halton":
        unit = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
    else:
        unit = np.random.default_rng(seed).random((n, 2))
    return qmc.scale(unit, low, high)


class LevelSetIntegrator:
    """Интегрирование по множеству уровня F^-1(z) внутри ящика склейкой решений LSDE"""

    def __init__(self, F: FieldModel, box: HBox, solver_cfg: Optional[SolverConfig] = None,
                 metric: Optional[MetricConfig] = None,
                 seed_retries: int = MEASURE_CONFIG["seed_retries"],
                 max_glue_steps: int = MEASURE_CONFIG["max_glue_steps"],
                 level_tol: float = MEASURE_CONFIG["level_tol"]):
        if not box.finite:
            raise ValueError("Интегрирование по уровню требует конечного ящика")
        self.F = F
        self.box = box
        self.solver_cfg = solver_cfg or SolverConfig()
        self.metric = metric or MetricConfig()
        self.seed_retries = seed_retries
        self.max_glue_steps = max_glue_steps
        self.level_tol = level_tol

    def _starts(self, rng: np.random.Generator) -> np.ndarray:
        """Старты: вертикальная ось через центр ящика (от центра наружу), затем случайные точки"""
        center = self.box.center
        heights = np.linspace(self.box.lower[2], self.box.upper[2], self.seed_retries) - center[2]
        heights = heights[np.argsort(np.abs(heights), kind="stable")]
        axis = np.tile(center, (len(heights), 1))
        axis[:, 2] += heights
        random = self.box.lower + (self.box.upper - self.box.lower) * rng.random((self.seed_retries, 3))
        return np.vstack([axis, random])

    def find_seed(self, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """
        Точка множества уровня F = z в ящике с невырожденным градиентом

        Raises:
            SeedNotFound: ни один старт не дал подходящей точки
        """
        for start in self._starts(rng):
            point, residual = snap_to_level(self.F, start, z)
            if (residual <= self.level_tol and bool(self.box.contains(point))
                    and float(jacobian_h(self.F, point)) > 1e-10):
                return point
        raise SeedNotFound(f"Не найдена точка уровня z={np.asarray(z).tolist()} в ящике")

    def _solve(self, q: np.ndarray) -> Trace:
        try:
            return solve(self.F, q, q, self.solver_cfg, self.metric, diagnostics=False)
        except LSDEError as e:
            logger.debug("Повтор решения с delta/2 в точке %s: %s", q.tolist(), e)
            halved = replace(self.solver_cfg, delta=self.solver_cfg.delta / 2.0)
            return solve(self.F, q, q, halved, self.metric, diagnostics=False)

    def _measure(self, piece: Trace, weight: Optional[Callable]) -> float:
        if weight is None:
            return area_measure(piece, self.box)
        return float(trapezoid(weight(piece.path), piece.times))

    def integrate(self, z: np.ndarray, rng: np.random.Generator,
                  weight: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> float:
        """Мера (или интеграл weight) множества уровня F = z в ящике"""
        seed = self.find_seed(z, rng)
        total = 0.0
        for direction in (1, -1):
            q = seed
            for step in range(self.max_glue_steps):
                trace = self._solve(q)
                if direction > 0:
                    piece = trace.restrict(0.0, trace.delta)
                else:
                    piece = trace.restrict(-trace.delta, 0.0)
                total += self._measure(piece, weight)
                if not np.all(self.box.contains(piece.path)):
                    break
                q = piece.path[-1] if direction > 0 else piece.path[0]
            else:
                logger.warning("Достигнут предел склеек (%d) для z=%s", self.max_glue_steps,
                               np.asarray(z).tolist())
        return total


def _level_set_average(integrator: LevelSetIntegrator, points: np.ndarray, seed: int,
                       workers: int, weight: Optional[Callable] = None):
    child_seeds = derive_seeds(seed, len(points))

    def task(args) -> Tuple[float, str]:
        z, child = args
        rng = np.random.default_rng(child)
        try:
            return integrator.integrate(z, rng, weight), "ok"
        except SeedNotFound:
            return 0.0, "seed_not_found"
        except LSDEError as e:
            logger.debug("Пропуск z=%s: %s", z.tolist(), e)
            return 0.0, "solver_failed"

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(task, zip(points, child_seeds)))
    values = np.array([value for value, _ in results])
    statuses = [status for _, status in results]
    return values, statuses


def coarea_check(F: FieldModel, box: HBox, z_samples: int = MEASURE_CONFIG["z_samples"],
                 solver_cfg: Optional[SolverConfig] = None, seed: int = 0,
                 metric: Optional[MetricConfig] = None,
                 measure_cfg: Optional[Dict] = None) -> Tuple[MeasureReport, pd.DataFrame]:
    """
    Проверка формулы коплощади на ящике

    Returns:
        (MeasureReport, таблица вкладов z1, z2, contribution)
    """
    cfg = {**MEASURE_CONFIG, **(measure_cfg or {})}
    metric = metric or MetricConfig()
    if z_samples < 2:
        raise ValueError("Требуется не менее 2 значений z")

    lhs = box_integral(lambda x: jacobian_h(F, x), box, int(cfg["quadrature"]), int(cfg["workers"]))
    low, high = image_rectangle(F, box, int(cfg["image_grid"]), float(cfg["image_padding"]))
    area = float(np.prod(high - low))
    points = sample_rectangle(low, high, z_samples, cfg["sampler"], seed)

    integrator = LevelSetIntegrator(
        F, box, solver_cfg, metric, int(cfg["seed_retries"]), int(cfg["max_glue_steps"]),
        float(cfg["level_tol"]),
    )
    values, statuses = _level_set_average(integrator, points, seed, int(cfg["workers"]))

    rhs = area * float(np.mean(values))
    standard_error = area * float(np.std(values, ddof=1)) / np.sqrt(len(values))
    skipped = sum(status != "ok" for status in statuses)
    if skipped:
        logger.warning("Пропущено %d из %d значений z", skipped, len(values))
    logger.info("Коплощадь: lhs=%.6f, rhs=%.6f +- %.2e", lhs, rhs, standard_error)

    report = MeasureReport(
        lhs=lhs,
        rhs=rhs,
        rel_error=relative_error(lhs, rhs),
        samples=z_samples,
        seed=seed,
        standard_error=standard_error,
        skipped=skipped,
        details={
            "seed_not_found": statuses.count("seed_not_found"),
            "solver_failed": statuses.count("solver_failed"),
            "rectangle": [low.tolist(), high.tolist()],
            "box": box.to_list(),
            "sampler": cfg["sampler"],
        },
    )
    frame = pd.DataFrame(np.column_stack([points, values]), columns=COAREA_COLUMNS)
    return report, frame


def functional_density_check(F: FieldModel, p: PointLike, radii: Sequence[float],
                             eps: float = 0.5, z_samples: int = 256,
                             solver_cfg: Optional[SolverConfig] = None, seed: int = 0,
                             metric: Optional[MetricConfig] = None,
                             measure_cfg: Optional[Dict] = None) -> Dict:
    """
    Значения r^-4 int u(delta_r x) d nu_F для нормированной конической функции
    u = c (eps - d(0, x))^+ через множества уровня раздутий F_{p,r}

    Предел при r -> 0 равен J_h F(p).
    """
    cfg = {**MEASURE_CONFIG, **(measure_cfg or {})}
    metric = metric or MetricConfig()
    height = eps ** 2 / np.sqrt(metric.lam)
    support = HBox(np.array([-eps, -eps, -height]), np.array([eps, eps, height]))

    def cone(x):
        return np.clip(eps - norm(metric, x), 0.0, None)

    mass = box_integral(cone, support, int(cfg["quadrature"]) // 2, int(cfg["workers"]))

    def bump(x):
        return cone(x) / mass

    target = float(jacobian_h(F, p))
    rows = []
    for r in radii:
        scaled = blowup(F, p, r)
        low, high = image_rectangle(scaled, support, int(cfg["image_grid"]), float(cfg["image_padding"]))
        points = sample_rectangle(low, high, z_samples, cfg["sampler"], seed)
        integrator = LevelSetIntegrator(
            scaled, support, solver_cfg, metric, int(cfg["seed_retries"]),
            int(cfg["max_glue_steps"]), float(cfg["level_tol"]),
        )
        values, statuses = _level_set_average(integrator, points, seed, int(cfg["workers"]), bump)
        value = float(np.prod(high - low)) * float(np.mean(values))
        rows.append({
            "r": r,
            "value": value,
            "deviation": abs(value - target),
            "skipped": sum(status != "ok" for status in statuses),
        })
        logger.info("Функциональная плотность при r=%.4g: %.6f (цель %.6f)", r, value, target)
    return {"target": target, "eps": eps, "values": rows}
