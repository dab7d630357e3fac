"""
Сшивка ростков на дискретной сетке.

Росток A(s, t) задан на парах моментов времени; сшитая функция f строится
составными суммами A по соседним узлам от опорного узла в обе стороны.
Дефект ростка delta A(s, u, t) = A(s, t) - A(s, u) - A(u, t) оценивается по
тройкам узлов.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

GERM_NORM_MODES = ("full", "dyadic")


@dataclass(frozen=True)
class SampledFunction:
    """Функция, заданная значениями в узлах строго возрастающей сетки"""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("Сетка должна содержать не менее 2 узлов")
        if not np.all(np.isfinite(times)) or np.any(np.diff(times) <= 0):
            raise ValueError("Узлы сетки должны строго возрастать")
        if values.shape[0] != len(times):
            raise ValueError(
                f"Число значений ({values.shape[0]}) не совпадает с числом узлов ({len(times)})"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def is_vector(self) -> bool:
        return self.values.ndim > 1

    def at(self, t: np.ndarray) -> np.ndarray:
        """Значения в узлах сетки (t обязано совпадать с узлами)"""
        return self.values[node_index(self.times, t)]

    def interpolate(self, t) -> np.ndarray:
        """Кусочно-линейная интерполяция"""
        t = np.asarray(t, dtype=float)
        if not self.is_vector:
            return np.interp(t, self.times, self.values)
        return np.stack(
            [np.interp(t, self.times, self.values[:, k]) for k in range(self.values.shape[1])],
            axis=-1,
        )


@dataclass(frozen=True)
class Germ:
    """Росток A(s, t) с показателем гладкости дефекта alpha"""

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"Показатель alpha должен быть положительным, получено {self.alpha}")

    def __call__(self, s, t) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(s, dtype=float), np.asarray(t, dtype=float)))

    def defect(self, s, u, t) -> np.ndarray:
        return self(s, t) - self(s, u) - self(u, t)


@dataclass(frozen=True)
class SewingResult:
    path: SampledFunction
    germ_norm_estimate: float
    kappa: float
    defect_bound: float
    increments: np.ndarray


def node_index(times: np.ndarray, t) -> np.ndarray:
    """Индексы узлов сетки, совпадающих с моментами t"""
    t = np.asarray(t, dtype=float)
    idx = np.searchsorted(times, t.ravel())
    idx = np.clip(idx, 0, len(times) - 1)
    if not np.all(times[idx] == t.ravel()):
        raise ValueError("Моменты времени не совпадают с узлами сетки")
    return idx.reshape(t.shape)


def sewing_kappa(alpha: float) -> float:
    """Константа сшивки kappa = (1 - 2^-alpha)^-1"""
    if alpha <= 0:
        return float("inf")
    return 1.0 / (1.0 - 2.0 ** (-alpha))


def pair_lags(n: int, mode: str = "full", max_lag: Optional[int] = None) -> np.ndarray:
    """Сдвиги индексов для перебора пар узлов: все или степени двойки"""
    top = n - 1 if max_lag is None else min(max_lag, n - 1)
    if top < 1:
        return np.array([], dtype=int)
    if mode == "full":
        return np.arange(1, top + 1)
    if mode == "dyadic":
        return 2 ** np.arange(int(np.floor(np.log2(top))) + 1)
    raise ValueError(f"Неизвестный режим перебора пар: {mode}")


def _magnitude(values: np.ndarray, vector: bool) -> np.ndarray:
    return np.linalg.norm(values, axis=-1) if vector else np.abs(values)


def holder_norm(f: SampledFunction, beta: float, mode: str = "full") -> float:
    """
    Гёльдерова полунорма sup |f(t) - f(s)| / |t - s|^beta по парам узлов

    Args:
        f: Функция на сетке
        beta: Показатель Гёльдера
        mode: full (все пары) или dyadic (сдвиги 2^k)

    Returns:
        Значение полунормы
    """
    best = 0.0
    for k in pair_lags(len(f), mode):
        diff = _magnitude(f.values[k:] - f.values[:-k], f.is_vector)
        step = (f.times[k:] - f.times[:-k]) ** beta
        best = max(best, float(np.max(diff / step)))
    return best


def _dyadic_triples(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    starts, mids, ends = [], [], []
    width = 2
    while width <= n - 1:
        s = np.arange(0, n - width, width)
        starts.append(s)
        mids.append(s + width // 2)
        ends.append(s + width)
        width *= 2
    if not starts:
        empty = np.array([], dtype=int)
        return empty, empty, empty
    return np.concatenate(starts), np.concatenate(mids), np.concatenate(ends)


def germ_norm(germ: Germ, times: np.ndarray, mode: str = "full") -> float:
    """
    Оценка sup |delta A(s, u, t)| / |t - s|^(1 + alpha) по тройкам узлов

    Режим full перебирает все тройки s < u < t (O(n^3)), dyadic только
    тройки (s, середина, t) двоичных отрезков.
    """
    times = np.asarray(times, dtype=float)
    n = len(times)
    if mode not in GERM_NORM_MODES:
        raise ValueError(f"Неизвестный режим оценки нормы ростка: {mode}")
    exponent = 1.0 + germ.alpha
    if n < 3:
        return 0.0

    if mode == "dyadic":
        s, u, t = _dyadic_triples(n)
        defect = germ.defect(times[s], times[u], times[t])
        vector = defect.ndim > 1
        return float(np.max(_magnitude(defect, vector) / (times[t] - times[s]) ** exponent))

    best = 0.0
    for i in range(n - 2):
        rest = np.arange(i + 1, n)
        u_idx, t_idx = np.meshgrid(rest, rest, indexing="ij")
        mask = u_idx < t_idx
        u_idx, t_idx = u_idx[mask], t_idx[mask]
        s_val = np.full(len(u_idx), times[i])
        defect = germ.defect(s_val, times[u_idx], times[t_idx])
        vector = defect.ndim > 1
        ratio = _magnitude(defect, vector) / (times[t_idx] - times[i]) ** exponent
        best = max(best, float(np.max(ratio)))
    return best


def _richardson_correction(germ: Germ, times: np.ndarray, fine: np.ndarray) -> np.ndarray:
    """Поправка Ричардсона: разность составных сумм на сетках h и 2h"""
    n = len(times)
    if n < 3 or (n - 1) % 2 != 0:
        raise ValueError("Экстраполяция требует чётного числа интервалов")
    coarse_inc = germ(times[0:-1:2], times[2::2])
    coarse = np.concatenate([np.zeros((1,) + coarse_inc.shape[1:]), np.cumsum(coarse_inc, axis=0)])
    corr_even = fine[::2] - coarse
    even = np.arange(0, n, 2)
    nodes = np.arange(n)
    if corr_even.ndim == 1:
        return np.interp(nodes, even, corr_even)
    return np.column_stack([np.interp(nodes, even, corr_even[:, k]) for k in range(corr_even.shape[1])])


def sew(germ: Germ, times: Iterable[float], f0, anchor_index: int = 0,
        extrapolate: bool = False, norm_mode: Optional[str] = "dyadic") -> SewingResult:
    """
    Сшивка ростка составными суммами от опорного узла

    Args:
        germ: Росток A(s, t)
        times: Строго возрастающая сетка, не менее 2 узлов
        f0: Значение в опорном узле
        anchor_index: Индекс опорного узла
        extrapolate: Экстраполяция Ричардсона по сеткам h и 2h
        norm_mode: Режим оценки нормы ростка (None отключает оценку)

    Returns:
        SewingResult со сшитой функцией, оценкой нормы ростка и границей дефекта
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise ValueError("Сетка должна содержать не менее 2 узлов")
    if np.any(np.diff(times) <= 0):
        raise ValueError("Узлы сетки должны строго возрастать")
    if not 0 <= anchor_index < len(times):
        raise ValueError(f"Опорный индекс {anchor_index} вне сетки из {len(times)} узлов")

    increments = germ(times[:-1], times[1:])
    cumulative = np.concatenate(
        [np.zeros((1,) + increments.shape[1:]), np.cumsum(increments, axis=0)]
    )
    if extrapolate:
        cumulative = cumulative + _richardson_correction(germ, times, cumulative)

    values = np.asarray(f0, dtype=float) + cumulative - cumulative[anchor_index]
    values[anchor_index] = f0

    kappa = sewing_kappa(germ.alpha)
    estimate = germ_norm(germ, times, norm_mode) if norm_mode else float("nan")
    span = float(times[-1] - times[0])
    bound = kappa * estimate * span ** (1.0 + germ.alpha)

    return SewingResult(
        path=SampledFunction(times, values),
        germ_norm_estimate=estimate,
        kappa=kappa,
        defect_bound=bound,
        increments=increments,
    )


def sampled_germ(g1: SampledFunction, g2: SampledFunction, alpha: float) -> Germ:
    """Росток интеграла Юнга A(s, t) = g1(s) * (g2(t) - g2(s))"""
    def evaluator(s, t):
        return g1.at(s) * (g2.at(t) - g2.at(s))
    return Germ(evaluator, alpha)


def young_integral(g1: SampledFunction, g2: SampledFunction,
                   exponents: Tuple[float, float] = (1.0, 1.0),
                   extrapolate: bool = False) -> SewingResult:
    """
    Интеграл Юнга int g1 dg2 как сшивка ростка g1(s)(g2(t) - g2(s))

    Args:
        g1, g2: Функции на одной сетке
        exponents: Показатели Гёльдера (beta1, beta2); граница дефекта
            осмысленна при beta1 + beta2 > 1
        extrapolate: Экстраполяция Ричардсона

    Returns:
        SewingResult; интеграл как SampledFunction лежит в .path
        (нулевой в первом узле), остальные поля - оценки сшивки
    """
    if len(g1) != len(g2) or not np.array_equal(g1.times, g2.times):
        raise ValueError("Функции должны быть заданы на одной сетке")
    alpha = float(sum(exponents)) - 1.0
    if alpha > 0:
        return sew(sampled_germ(g1, g2, alpha), g1.times, 0.0, 0, extrapolate)

    logger.warning("beta1 + beta2 = %.3f <= 1: граница дефекта не определена", sum(exponents))
    result = sew(sampled_germ(g1, g2, 1.0), g1.times, 0.0, 0, extrapolate, norm_mode=None)
    return replace(result, kappa=float("inf"), defect_bound=float("inf"))
