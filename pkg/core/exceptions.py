from typing import List, Optional


class LSDEError(Exception):
    """Базовое исключение Heis LSDE"""


class DegeneratePoint(LSDEError):
    """Горизонтальный градиент поля вырожден в базовой точке"""


class NoAdmissibleRadii(LSDEError):
    """Не удалось подобрать радиусы (eps0, delta0, rho0)"""


class NonConvergence(LSDEError):
    """Итерация Пикара не сошлась после всех повторов"""


class NotFound(LSDEError):
    """Проекция точки на кривую не найдена"""


class SeedNotFound(LSDEError):
    """На множестве уровня не найдено затравочной точки в ящике"""


class PointOffCurve(LSDEError):
    """Точка не лежит на кривой с заданной точностью"""


class TraceFormatError(LSDEError):
    """Некорректный или пустой файл кривой"""


class InvalidConfig(LSDEError):
    """Конфигурация не прошла валидацию"""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        super().__init__(message)
        self.errors = errors or []
