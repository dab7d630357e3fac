import math
from typing import Any, List, Optional, Union

import numpy as np


def format_number(value: Optional[Union[int, float]], decimal_places: int = 6) -> str:
    """
    Форматирование числа для отчётов

    Args:
        value: Число для форматирования
        decimal_places: Количество значащих цифр

    Returns:
        Отформатированная строка (N/A для пустых и нечисловых значений)
    """
    if value is None:
        return "N/A"
    try:
        value = float(value)
    except (TypeError, ValueError):
        return str(value)
    if math.isnan(value):
        return "N/A"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{decimal_places}g}"


def safe_divide(numerator: float, denominator: float, default: float = 0.0) -> float:
    """
    Безопасное деление с обработкой деления на ноль

    Args:
        numerator: Числитель
        denominator: Знаменатель
        default: Значение по умолчанию при делении на ноль или NaN

    Returns:
        Результат деления или значение по умолчанию
    """
    if numerator is None or denominator is None:
        return default
    if math.isnan(numerator) or math.isnan(denominator) or denominator == 0:
        return default
    return numerator / denominator


def relative_error(lhs: float, rhs: float, floor: float = 1e-12) -> float:
    """
    Относительная ошибка |lhs - rhs| / max(|lhs|, |rhs|, floor)

    Для lhs = rhs = 0 возвращает 0.
    """
    gap = abs(lhs - rhs)
    if gap == 0:
        return 0.0
    return safe_divide(gap, max(abs(lhs), abs(rhs), floor), default=float("inf"))


def derive_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    """Независимые дочерние зёрна для параллельных задач (порядок детерминирован)"""
    return np.random.SeedSequence(seed).spawn(count)


def to_serializable(value: Any) -> Any:
    """Приведение numpy-типов и неконечных чисел к виду, пригодному для JSON"""
    if isinstance(value, dict):
        return {str(key): to_serializable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_serializable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_serializable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value
