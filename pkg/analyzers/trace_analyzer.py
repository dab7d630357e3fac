import logging
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import bisect, root

from config import EXPERIMENT_DEFAULTS, MEASURE_CONFIG, RADII_CONFIG
from core.exceptions import LSDEError, NotFound
from core.field import FieldModel
from core.hgroup import (
    MetricConfig, PointLike, as_points, dist, equivalence_constant, gauge_h, gauge_v, inv, mul,
    sample_ball,
)
from core.sewing import holder_norm, pair_lags
from analyzers.lsde_solver import SolverConfig, Trace, residuals, solve, vertical_error_norm

logger = logging.getLogger(__name__)


def _c_equiv(trace: Trace, c_equiv: Optional[float]) -> float:
    if c_equiv is not None:
        return c_equiv
    if trace.certificate is not None:
        return trace.certificate.constants.c_equiv
    return equivalence_constant(trace.metric, RADII_CONFIG["equivalence_samples"])


def injectivity_check(trace: Trace, alpha: Optional[float] = None, rho: Optional[float] = None,
                      c_equiv: Optional[float] = None) -> Dict:
    """
    Проверка |t - s|^(1/2) <= rho * d(gamma_s, gamma_t) на парах с |t - s| <= 2*delta_max

    delta_max - наибольшее delta с (2 delta)^alpha ||E|| <= 1/2. Соседние узлы
    проверяются всегда, даже если delta_max меньше шага сетки.
    """
    alpha = trace.alpha if alpha is None else alpha
    if rho is None:
        rho = np.sqrt(2.0) * _c_equiv(trace, c_equiv)

    error = trace.error_norm
    if not np.isfinite(error):
        error = vertical_error_norm(trace)
    delta_max = float("inf") if error == 0 else 0.5 * (0.5 / error) ** (1.0 / alpha)
    window = min(2.0 * delta_max, 2.0 * trace.delta)
    max_lag = max(1, int(np.floor(window / trace.mesh + 1e-9)))

    worst = float("inf")
    for k in pair_lags(len(trace), "full", max_lag):
        span = np.sqrt(trace.times[k:] - trace.times[:-k])
        d = dist(trace.metric, trace.path[:-k], trace.path[k:])
        worst = min(worst, float(np.min(rho * d / span)))
    return {
        "rho": float(rho),
        "delta_max": delta_max,
        "holds": worst >= 1.0,
        "margin": worst,
        "max_lag": max_lag,
    }


def modulus_check(trace: Trace, alpha: Optional[float] = None) -> Dict:
    """Гёльдеровы нормы кривой: ||gamma^h||_{(1+alpha)/2} и sup d / |t - s|^(1/2)"""
    alpha = trace.alpha if alpha is None else alpha
    holder_h = holder_norm(trace.horizontal, (1.0 + alpha) / 2.0)

    holder_d = 0.0
    for k in pair_lags(len(trace)):
        d = dist(trace.metric, trace.path[:-k], trace.path[k:])
        holder_d = max(holder_d, float(np.max(d / np.sqrt(trace.times[k:] - trace.times[:-k]))))
    return {"holder_h": holder_h, "holder_d_half": holder_d}


def project_point(trace: Trace, x: PointLike, tol: float = 1e-12) -> Dict:
    """
    Поиск t, при котором (gamma_t^-1 x)^v = +-|(gamma_t^-1 x)^h|^2

    Кривая сдвигается так, что gamma_0 становится началом координат. Если
    вертикальная калибровка x не превосходит горизонтальную, ответ t = 0.

    Raises:
        NotFound: на отрезке [0, 2 x^v] нет смены знака
    """
    start = as_points(trace.start)
    local = mul(inv(start), as_points(x))
    if float(gauge_v(local)) <= float(gauge_h(local)):
        return {"t": 0.0, "found": True, "residual": 0.0}

    sign = 1.0 if local[2] > 0 else -1.0

    def level(t):
        z = mul(inv(mul(inv(start), trace.interpolate(t))), local)
        return z[2] - sign * float(gauge_h(z)) ** 2

    lower, upper = sorted((0.0, 2.0 * float(local[2])))
    lower = max(lower, float(trace.times[0]))
    upper = min(upper, float(trace.times[-1]))
    if level(lower) * level(upper) > 0:
        raise NotFound(f"Нет смены знака на отрезке [{lower:.4g}, {upper:.4g}]")
    t = bisect(level, lower, upper, xtol=tol)
    return {"t": float(t), "found": True, "residual": float(level(t))}


def snap_to_level(F: FieldModel, x: np.ndarray, target: np.ndarray):
    """Горизонтальный метод Ньютона: x * (a, b, 0) с F = target"""
    def equations(ab):
        return F.evaluate(mul(x, np.array([ab[0], ab[1], 0.0]))) - target

    solution = root(equations, np.zeros(2), method="hybr")
    point = mul(x, np.array([solution.x[0], solution.x[1], 0.0]))
    return point, float(np.max(np.abs(equations(solution.x))))


def surjectivity_check(F: FieldModel, trace: Trace, eps: float, samples: int = 1000,
                       seed: int = 0, level_tol: float = MEASURE_CONFIG["level_tol"],
                       max_draws: Optional[int] = None) -> Dict:
    """
    Максимальное расстояние от точек множества уровня в B(eps, p) до узлов кривой

    Кандидаты из шара притягиваются к уровню F(q) горизонтальным методом
    Ньютона и принимаются, если остаются в шаре.
    """
    metric = trace.metric
    rng = np.random.default_rng(seed)
    p = as_points(trace.base_point)
    target = F.evaluate(as_points(trace.start))
    max_draws = max_draws or 20 * samples

    accepted: List[np.ndarray] = []
    draws = 0
    while len(accepted) < samples and draws < max_draws:
        candidate = sample_ball(metric, p, eps, 1, rng)[0]
        draws += 1
        point, residual = snap_to_level(F, candidate, target)
        if residual <= level_tol and float(dist(metric, p, point)) <= eps:
            accepted.append(point)

    result = {"accepted": len(accepted), "draws": draws, "max_gap": float("nan"),
              "mean_gap": float("nan"), "mesh": trace.mesh}
    if not accepted:
        logger.warning("Не принято ни одной точки множества уровня в B(%.3g, p)", eps)
        return result

    points = np.array(accepted)
    gaps = np.array([
        float(np.min(dist(metric, point, trace.path))) for point in points
    ])
    result["max_gap"] = float(np.max(gaps))
    result["mean_gap"] = float(np.mean(gaps))
    return result


def _common_nodes(coarse: Trace, fine: Trace) -> np.ndarray:
    limit = min(coarse.times[-1], fine.times[-1])
    mask = np.abs(coarse.times) <= limit * (1.0 + 1e-12)
    return np.nonzero(mask)[0]


def uniqueness_check(F: FieldModel, p: PointLike, q: PointLike, cfg_a: SolverConfig,
                     cfg_b: SolverConfig, metric: Optional[MetricConfig] = None,
                     reference: Optional[Trace] = None) -> Dict:
    """
    Сравнение решений на двух сетках: sup d по общим узлам и
    проверка перепараметризации t_bar = t по ближайшим узлам
    """
    metric = metric or MetricConfig()
    first = reference if reference is not None else solve(F, p, q, cfg_a, metric, diagnostics=False)
    second = solve(F, p, q, cfg_b, metric, diagnostics=False)
    coarse, fine = (first, second) if len(first) <= len(second) else (second, first)

    idx = _common_nodes(coarse, fine)
    if len(idx) == 0:
        raise ValueError("У решений нет общих узлов")
    fine_points = fine.interpolate(coarse.times[idx])
    sup_distance = float(np.max(dist(metric, coarse.path[idx], fine_points)))

    nearest = np.array([
        int(np.argmin(dist(metric, point, fine.path))) for point in coarse.path[idx]
    ])
    reparam_gap = float(np.max(np.abs(fine.times[nearest] - coarse.times[idx])))
    return {
        "sup_distance": sup_distance,
        "nodes_compared": int(len(idx)),
        "reparametrization_gap": reparam_gap,
        "fine_mesh": fine.mesh,
    }


def stability_run(fields: Sequence[FieldModel], F: FieldModel, p: PointLike, q: PointLike,
                  cfg: SolverConfig, metric: Optional[MetricConfig] = None) -> List[Dict]:
    """Расстояния sup_t d(gamma^n_t, gamma_t) для последовательности полей F^n -> F"""
    metric = metric or MetricConfig()
    limit = solve(F, p, q, cfg, metric, diagnostics=False)
    rows = []
    for index, field_n in enumerate(fields, start=1):
        row = {"index": index, "field": field_n.name, "sup_distance": float("nan"),
               "converged": False}
        try:
            trace = solve(field_n, p, q, cfg, metric, diagnostics=False)
            idx = _common_nodes(trace, limit)
            other = limit.interpolate(trace.times[idx])
            row["sup_distance"] = float(np.max(dist(metric, trace.path[idx], other)))
            row["converged"] = True
        except LSDEError as e:
            row["error"] = str(e)
            logger.warning("Поле %s: %s", field_n.name, e)
        rows.append(row)
    return rows


class TraceAnalyzer:
    """Анализатор решения LSDE: невязки, инъективность, модуль, сюръективность"""

    def __init__(self, field: FieldModel, trace: Trace, solver_cfg: Optional[SolverConfig] = None,
                 thresholds: Optional[Dict] = None):
        self.field = field
        self.trace = trace
        self.solver_cfg = solver_cfg or SolverConfig()
        self.thresholds = {**EXPERIMENT_DEFAULTS["verify"], **(thresholds or {})}

    def get_residual_analysis(self) -> Dict:
        """Невязки горизонтального и вертикального уравнений"""
        analysis = {"passed": False, "residual_h": None, "error_norm": None,
                    "levelset_drift": None}
        try:
            report = residuals(self.field, self.trace, self.solver_cfg.error_norm_mode)
            analysis.update(report)
            analysis["passed"] = (
                report["residual_h"] <= self.thresholds["residual_tol"]
                and report["levelset_drift"] <= self.thresholds["drift_tol"]
            )
        except Exception as e:
            analysis["error"] = str(e)
        return analysis

    def get_injectivity_analysis(self) -> Dict:
        """Горизонтальная инъективность на парах близких узлов"""
        analysis = {"passed": False, "rho": None, "delta_max": None, "margin": None}
        try:
            report = injectivity_check(self.trace)
            analysis.update(report)
            analysis["passed"] = report["holds"]
        except Exception as e:
            analysis["error"] = str(e)
        return analysis

    def get_modulus_analysis(self) -> Dict:
        analysis = {"passed": False, "holder_h": None, "holder_d_half": None}
        try:
            report = modulus_check(self.trace)
            analysis.update(report)
            analysis["passed"] = bool(np.isfinite(report["holder_h"]))
        except Exception as e:
            analysis["error"] = str(e)
        return analysis

    def get_surjectivity_analysis(self, seed: int = 0) -> Dict:
        """Покрытие множества уровня узлами кривой"""
        analysis = {"passed": False, "max_gap": None, "accepted": 0}
        try:
            report = surjectivity_check(
                self.field, self.trace, self.thresholds["surjectivity_eps"],
                int(self.thresholds["surjectivity_samples"]), seed,
            )
            analysis.update(report)
            bound = 3.0 * np.sqrt(self.trace.mesh)
            analysis["bound"] = bound
            analysis["passed"] = report["accepted"] > 0 and report["max_gap"] <= bound
        except Exception as e:
            analysis["error"] = str(e)
        return analysis

    def get_uniqueness_analysis(self) -> Dict:
        """Совпадение с решением на более мелкой сетке"""
        analysis = {"passed": False, "sup_distance": None}
        try:
            fine_cfg = replace(
                self.solver_cfg,
                grid_levels=self.solver_cfg.grid_levels + int(self.thresholds["fine_levels"]),
                delta=self.trace.delta,
            )
            report = uniqueness_check(
                self.field, self.trace.base_point, self.trace.start, self.solver_cfg, fine_cfg,
                self.trace.metric, reference=self.trace,
            )
            analysis.update(report)
            analysis["passed"] = report["sup_distance"] <= self.thresholds["uniqueness_tol"]
        except Exception as e:
            analysis["error"] = str(e)
        return analysis

    def get_summary_metrics(self, seed: int = 0) -> Dict:
        """Все проверки и общий итог"""
        checks = {
            "residuals": self.get_residual_analysis(),
            "injectivity": self.get_injectivity_analysis(),
            "modulus": self.get_modulus_analysis(),
            "surjectivity": self.get_surjectivity_analysis(seed),
            "uniqueness": self.get_uniqueness_analysis(),
        }
        failed = [name for name, check in checks.items() if not check["passed"]]
        return {"checks": checks, "passed": not failed, "failed": failed}
