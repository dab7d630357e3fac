"""
Решение уравнения множества уровня (LSDE) для поля F в окрестности точки p.

Кривая gamma = (eta, f) ищется итерацией Пикара: вертикальная компонента f
сшивается из ростка
    A(s, t) = (t - s) + eta1(s) eta2(t) - eta1(t) eta2(s),
а горизонтальная обновляется по правилу
    eta <- q^h - grad F(p)^-1 (R(p, gamma_t) - R(p, q)).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config import RADII_CONFIG, SOLVER_CONFIG
from core.exceptions import DegeneratePoint, NoAdmissibleRadii, NonConvergence
from core.field import FieldModel, holder_constant, nondegeneracy, taylor_remainder
from core.hgroup import (
    GeometryConstants, HPoint, MetricConfig, PointLike, as_points, dist, geometry_constants,
)
from core.sewing import Germ, SampledFunction, holder_norm, pair_lags, sew, sewing_kappa

logger = logging.getLogger(__name__)

ERROR_NORM_MODES = ("full", "dyadic")


@dataclass(frozen=True)
class SolverConfig:
    """Параметры итерации Пикара"""

    delta: float = SOLVER_CONFIG["delta"]
    grid_levels: int = SOLVER_CONFIG["grid_levels"]
    tol: float = SOLVER_CONFIG["tol"]
    max_iter: int = SOLVER_CONFIG["max_iter"]
    damping: float = SOLVER_CONFIG["damping"]
    halving_retries: int = SOLVER_CONFIG["halving_retries"]
    error_norm_mode: str = SOLVER_CONFIG["error_norm_mode"]
    ill_conditioned: float = SOLVER_CONFIG["ill_conditioned"]
    divergence_limit: float = SOLVER_CONFIG["divergence_limit"]

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta должна быть положительной, получено {self.delta}")
        if self.grid_levels < 4:
            raise ValueError(f"Число уровней сетки должно быть не меньше 4, получено {self.grid_levels}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"Демпфирование должно лежать в (0, 1], получено {self.damping}")
        if self.max_iter < 1 or self.halving_retries < 0:
            raise ValueError("Некорректные max_iter или halving_retries")
        if self.error_norm_mode not in ERROR_NORM_MODES:
            raise ValueError(f"Неизвестный режим нормы ошибки: {self.error_norm_mode}")

    @classmethod
    def from_dict(cls, data: Optional[Dict] = None) -> "SolverConfig":
        merged = {**SOLVER_CONFIG, **(data or {})}
        merged["grid_levels"] = int(merged["grid_levels"])
        merged["max_iter"] = int(merged["max_iter"])
        merged["halving_retries"] = int(merged["halving_retries"])
        return cls(**merged)

    @property
    def nodes(self) -> int:
        return 2 ** self.grid_levels + 1

    def grid(self, delta: Optional[float] = None) -> np.ndarray:
        """Равномерная сетка на [-delta, delta] с точным нулём в центре"""
        delta = self.delta if delta is None else delta
        times = np.linspace(-delta, delta, self.nodes)
        times[self.nodes // 2] = 0.0
        return times


@dataclass(frozen=True)
class RadiiCertificate:
    """Допустимые радиусы и значения проверенных условий"""

    eps0: float
    delta0: float
    rho0: float
    kappa: float
    holder: float
    inverse_norm: float
    constants: GeometryConstants
    conditions: Dict[str, Dict] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "eps0": self.eps0,
            "delta0": self.delta0,
            "rho0": self.rho0,
            "kappa": self.kappa,
            "holder": self.holder,
            "inverse_norm": self.inverse_norm,
            "c_equiv": self.constants.c_equiv,
            "beta_d": self.constants.beta_d,
            "conditions": self.conditions,
        }


@dataclass
class Trace:
    """Дискретное решение LSDE на сетке [-delta, delta]"""

    times: np.ndarray
    path: np.ndarray
    base_point: HPoint
    start: HPoint
    alpha: float
    delta: float
    metric: MetricConfig = field(default_factory=MetricConfig)
    iterations: int = 0
    converged: bool = False
    residual_h: float = float("nan")
    error_norm: float = float("nan")
    holder_h: float = float("nan")
    levelset_drift: float = float("nan")
    flags: List[str] = field(default_factory=list)
    vertical_increments: Optional[np.ndarray] = None
    certificate: Optional[RadiiCertificate] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.path = np.asarray(self.path, dtype=float)
        if self.path.shape != (len(self.times), 3):
            raise ValueError(f"Форма кривой {self.path.shape} не согласована с сеткой")
        SampledFunction(self.times, self.path)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def center_index(self) -> int:
        return int(np.argmin(np.abs(self.times)))

    @property
    def horizontal(self) -> SampledFunction:
        return SampledFunction(self.times, self.path[:, :2])

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.times)))

    def point(self, index: int) -> HPoint:
        return HPoint.from_array(self.path[index])

    def interpolate(self, t) -> np.ndarray:
        """Кусочно-линейная интерполяция кривой в координатах"""
        return SampledFunction(self.times, self.path).interpolate(t)

    def restrict(self, lower: float, upper: float) -> "Trace":
        """Часть кривой на узлах из [lower, upper]"""
        mask = (self.times >= lower) & (self.times <= upper)
        idx = np.nonzero(mask)[0]
        if len(idx) < 2:
            raise ValueError("Подынтервал должен содержать не менее 2 узлов")
        increments = None
        if self.vertical_increments is not None:
            increments = self.vertical_increments[idx[0]:idx[-1]]
        return replace(
            self,
            times=self.times[idx],
            path=self.path[idx],
            flags=list(self.flags),
            vertical_increments=increments,
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "x1": self.path[:, 0],
            "x2": self.path[:, 1],
            "x3": self.path[:, 2],
        })

    def diagnostics(self) -> Dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "delta": self.delta,
            "nodes": len(self),
            "residual_h": self.residual_h,
            "error_norm": self.error_norm,
            "holder_h": self.holder_h,
            "levelset_drift": self.levelset_drift,
            "flags": list(self.flags),
            "base_point": list(self.base_point),
            "start": list(self.start),
        }


def vertical_germ(times: np.ndarray, horizontal: np.ndarray, alpha: float) -> Germ:
    """Росток вертикальной компоненты для горизонтальной части eta"""
    eta = SampledFunction(times, horizontal)

    def evaluator(s, t):
        a = eta.at(s)
        b = eta.at(t)
        return (t - s) - (b[..., 0] * a[..., 1] - a[..., 0] * b[..., 1])

    return Germ(evaluator, alpha)


def _lag_germ(times: np.ndarray, horizontal: np.ndarray, k: int) -> np.ndarray:
    """Росток на парах (t_i, t_{i+k}) в том же порядке операций, что и vertical_germ"""
    a = horizontal[:-k]
    b = horizontal[k:]
    return (times[k:] - times[:-k]) - (b[:, 0] * a[:, 1] - a[:, 0] * b[:, 1])


def vertical_error_norm(trace: Trace, mode: str = "full") -> float:
    """sup |E_st| / |t - s|^(1 + alpha) по парам узлов"""
    times, path = trace.times, trace.path
    exponent = 1.0 + trace.alpha
    n = len(times)
    best = 0.0

    if trace.vertical_increments is not None and mode == "full":
        # Скользящие суммы приращений без повторного дифференцирования координат
        rolling = np.zeros(n - 1)
        for k in range(1, n):
            rolling = rolling[: n - k] + trace.vertical_increments[k - 1:]
            defect = rolling - _lag_germ(times, path[:, :2], k)
            best = max(best, float(np.max(np.abs(defect) / (times[k:] - times[:-k]) ** exponent)))
        return best

    for k in pair_lags(n, mode):
        a = path[:-k]
        b = path[k:]
        vertical = b[:, 2] - a[:, 2] - a[:, 0] * b[:, 1] + a[:, 1] * b[:, 0]
        span = times[k:] - times[:-k]
        best = max(best, float(np.max(np.abs(vertical - span) / span ** exponent)))
    return best


def residuals(F: FieldModel, trace: Trace, mode: str = "full") -> Dict[str, float]:
    """
    Невязки дискретного решения

    Returns:
        residual_h: sup |(gamma_s^-1 gamma_t)^h + grad F(p)^-1 (R(p, gamma_t) - R(p, gamma_s))|
        error_norm: sup |E_st| / |t - s|^(1 + alpha)
        levelset_drift: sup |F(gamma_t) - F(gamma_0)|
    """
    p = as_points(trace.base_point)
    inverse = np.linalg.inv(F.grad_h(p))
    corrected = trace.path[:, :2] + taylor_remainder(F, p, trace.path) @ inverse.T

    residual = 0.0
    for k in pair_lags(len(trace), mode):
        gap = np.linalg.norm(corrected[k:] - corrected[:-k], axis=-1)
        residual = max(residual, float(np.max(gap)))

    values = F.evaluate(trace.path)
    drift = np.linalg.norm(values - values[trace.center_index], axis=-1)
    return {
        "residual_h": residual,
        "error_norm": vertical_error_norm(trace, mode),
        "levelset_drift": float(np.max(drift)),
    }


def _inverse_norm(F: FieldModel, p: np.ndarray) -> float:
    return float(np.linalg.norm(np.linalg.inv(F.grad_h(p)), ord=2))


def _delta_conditions(eps: float, rho: float, alpha: float, kappa: float, c: float,
                      delta_max: float) -> Dict[str, float]:
    return {
        "vertical_modulus": 0.5 * (1.0 / rho) ** (2.0 / alpha),
        "ball_containment": (eps / (c * (1.0 + np.sqrt(1.0 + kappa)))) ** 2,
        "injectivity": 0.5 * (1.0 / (2.0 * kappa * rho ** 2)) ** (1.0 / alpha),
        "surjectivity": (1.0 / (4.0 * rho ** 2)) ** (1.0 / alpha),
        "delta_max": delta_max,
    }


def admissible_radii(F: FieldModel, p: PointLike, metric: Optional[MetricConfig] = None,
                     constants: Optional[GeometryConstants] = None,
                     radii_cfg: Optional[Dict] = None, seed: int = 0) -> RadiiCertificate:
    """
    Подбор радиусов (eps0, delta0, rho0) по выборочной константе Гёльдера

    Перебирает eps = eps_max / 2^k и выбирает вариант с наибольшим delta0.

    Raises:
        DegeneratePoint: градиент вырожден в p
        NoAdmissibleRadii: ни одно eps не удовлетворяет условиям
    """
    metric = metric or MetricConfig()
    cfg = {**RADII_CONFIG, **(radii_cfg or {})}
    p = as_points(p)
    check = nondegeneracy(F, p)
    if not check["nondegenerate"]:
        raise DegeneratePoint(f"Вырожденный градиент в точке {p.tolist()}: det={check['det']:.3e}")

    if constants is None:
        constants = geometry_constants(
            metric, int(cfg["equivalence_samples"]), int(cfg["beta_resolution"]), seed
        )
    c = constants.c_equiv
    alpha = F.alpha
    kappa = sewing_kappa(alpha)
    inverse_norm = _inverse_norm(F, p)
    margin = float(cfg["strict_margin"])
    floor = max(float(cfg["rho_floor"]), np.sqrt(2.0) * c * (1.0 + margin))

    best: Optional[RadiiCertificate] = None
    eps = float(cfg["eps_max"])
    for _ in range(int(cfg["eps_halvings"]) + 1):
        estimate = holder_constant(F, p, 4.0 * c * eps, int(cfg["holder_samples"]), seed, metric)
        holder = estimate.constant * float(cfg["safety_factor"])
        a = c * inverse_norm * holder
        contraction = a * (2.0 * eps) ** alpha

        if contraction < 1.0 and a * eps ** alpha <= 0.5:
            rho_min = a * (1.0 + kappa) ** ((1.0 + alpha) / 2.0) / (1.0 - contraction)
            rho = max(floor, rho_min)
            limits = _delta_conditions(eps, rho, alpha, kappa, c, float(cfg["delta_max"]))
            delta0 = min(limits.values()) * (1.0 - margin)
            logger.debug("eps=%.4g: H=%.4g, rho=%.4g, delta0=%.4g", eps, holder, rho, delta0)

            if best is None or delta0 > best.delta0:
                conditions = {
                    name: {"limit": value, "value": delta0, "satisfied": delta0 < value}
                    for name, value in limits.items()
                }
                conditions["contraction"] = {
                    "limit": 1.0, "value": contraction, "satisfied": contraction < 1.0
                }
                conditions["modulus"] = {
                    "limit": 0.5, "value": a * eps ** alpha, "satisfied": a * eps ** alpha <= 0.5
                }
                conditions["rho_equivalence"] = {
                    "limit": rho ** 2, "value": 2.0 * c ** 2, "satisfied": rho ** 2 > 2.0 * c ** 2
                }
                best = RadiiCertificate(
                    eps0=eps, delta0=delta0, rho0=rho, kappa=kappa, holder=holder,
                    inverse_norm=inverse_norm, constants=constants, conditions=conditions,
                )
        else:
            logger.debug("eps=%.4g отклонено: a*(2eps)^alpha=%.4g", eps, contraction)
        eps /= 2.0

    if best is None:
        raise NoAdmissibleRadii(
            f"Не найдено допустимых радиусов в точке {p.tolist()} "
            f"после {int(cfg['eps_halvings']) + 1} значений eps"
        )
    logger.info("Допустимые радиусы: eps0=%.4g, delta0=%.4g, rho0=%.4g",
                best.eps0, best.delta0, best.rho0)
    return best


class _Diverged(Exception):
    pass


def _picard(F: FieldModel, p: np.ndarray, q: np.ndarray, inverse: np.ndarray,
            cfg: SolverConfig, times: np.ndarray):
    center = len(times) // 2
    remainder_q = taylor_remainder(F, p, q)
    eta = np.tile(q[:2], (len(times), 1))

    def vertical(horizontal):
        return sew(vertical_germ(times, horizontal, F.alpha), times, q[2],
                   anchor_index=center, norm_mode=None)

    converged = False
    iteration = 0
    for iteration in range(1, cfg.max_iter + 1):
        sewn = vertical(eta)
        gamma = np.column_stack([eta, sewn.path.values])
        update = taylor_remainder(F, p, gamma) - remainder_q
        target = q[:2] - update @ inverse.T
        change = float(np.max(np.abs(target - eta)))
        if not np.isfinite(change) or change > cfg.divergence_limit:
            raise _Diverged(f"sup-изменение {change:.3e} на итерации {iteration}")
        eta = eta + cfg.damping * (target - eta)
        logger.debug("Итерация %d: sup-изменение %.3e", iteration, change)
        if change < cfg.tol:
            converged = True
            break

    sewn = vertical(eta)
    gamma = np.column_stack([eta, sewn.path.values])
    return gamma, sewn.increments, iteration, converged


def solve(F: FieldModel, p: PointLike, q: PointLike, cfg: Optional[SolverConfig] = None,
          metric: Optional[MetricConfig] = None, certificate: Optional[RadiiCertificate] = None,
          diagnostics: bool = True) -> Trace:
    """
    Решение LSDE через точку q с базой p

    Args:
        F: Поле
        p: Базовая точка (градиент в ней невырожден)
        q: Точка, через которую проходит кривая (gamma_0 = q)
        cfg: Параметры решателя
        metric: Метрика
        certificate: Допустимые радиусы (для предупреждения о q вне B(eps0, p))
        diagnostics: Вычислять невязки и нормы (O(n^2))

    Returns:
        Trace

    Raises:
        DegeneratePoint: градиент вырожден в p
        NonConvergence: итерация не сошлась после всех делений delta
    """
    cfg = cfg or SolverConfig()
    metric = metric or MetricConfig()
    p_arr = as_points(p).astype(float)
    q_arr = as_points(q).astype(float)

    check = nondegeneracy(F, p_arr)
    if not check["nondegenerate"]:
        raise DegeneratePoint(
            f"Вырожденный градиент в точке {p_arr.tolist()}: det={check['det']:.3e}"
        )

    flags: List[str] = []
    if check["condition"] > cfg.ill_conditioned:
        logger.warning("Плохо обусловленный градиент: cond=%.3e", check["condition"])
        flags.append("ill_conditioned")
    if certificate is not None and float(dist(metric, p_arr, q_arr)) > certificate.eps0:
        logger.warning("Точка q вне шара B(eps0=%.4g, p)", certificate.eps0)
        flags.append("outside_eps0")

    inverse = np.linalg.inv(F.grad_h(p_arr))
    delta = cfg.delta
    for attempt in range(cfg.halving_retries + 1):
        times = cfg.grid(delta)
        try:
            gamma, increments, iterations, converged = _picard(F, p_arr, q_arr, inverse, cfg, times)
        except _Diverged as e:
            logger.warning("Расходимость при delta=%.4g: %s", delta, e)
            converged = False
        if converged:
            break
        if attempt < cfg.halving_retries:
            logger.info("Повтор с delta=%.4g", delta / 2.0)
            delta /= 2.0
    else:
        raise NonConvergence(
            f"Итерация Пикара не сошлась после {cfg.halving_retries} делений delta "
            f"(последняя delta={delta:.4g})"
        )

    if delta < cfg.delta:
        flags.append("delta_halved")

    trace = Trace(
        times=times,
        path=gamma,
        base_point=HPoint.from_array(p_arr),
        start=HPoint.from_array(q_arr),
        alpha=F.alpha,
        delta=delta,
        metric=metric,
        iterations=iterations,
        converged=True,
        flags=flags,
        vertical_increments=increments,
        certificate=certificate,
    )

    if diagnostics:
        report = residuals(F, trace, cfg.error_norm_mode)
        trace.residual_h = report["residual_h"]
        trace.error_norm = report["error_norm"]
        trace.levelset_drift = report["levelset_drift"]
        trace.holder_h = holder_norm(trace.horizontal, (1.0 + F.alpha) / 2.0, cfg.error_norm_mode)
    logger.info("Решение: %d итераций, delta=%.4g, узлов %d", iterations, delta, len(trace))
    return trace
