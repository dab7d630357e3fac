import copy
import math
from typing import Any, Dict, List

from config import (
    CONFIG_SECTIONS, EXPERIMENT_DEFAULTS, FIELD_CONFIG, FIELD_NAMES, MEASURE_CONFIG,
    METRIC_CONFIG, RADII_CONFIG, SOLVER_CONFIG,
)

SECTION_DEFAULTS = {
    "metric": METRIC_CONFIG,
    "field": {**FIELD_CONFIG, "name": None},
    "solver": SOLVER_CONFIG,
    "radii": RADII_CONFIG,
    "measure": MEASURE_CONFIG,
    **EXPERIMENT_DEFAULTS,
}

COMMANDS_WITHOUT_FIELD = ("beta",)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value: Any, minimum: int) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= minimum


class ConfigValidator:
    """Класс для валидации пользовательской конфигурации"""

    def __init__(self):
        self.validation_results = {}
        self.warnings: List[str] = []
        self.errors: List[str] = []

    def merge_defaults(self, config: Dict) -> Dict:
        """Наложение пользовательских значений на значения по умолчанию"""
        merged = {name: copy.deepcopy(defaults) for name, defaults in SECTION_DEFAULTS.items()}
        for key, value in config.items():
            if key in merged and isinstance(value, dict):
                merged[key].update(copy.deepcopy(value))
            else:
                merged[key] = copy.deepcopy(value)
        merged.setdefault("seed", 0)
        merged.setdefault("p", [0.0, 0.0, 0.0])
        merged.setdefault("q", None)
        return merged

    def validate_all(self, config: Dict, command: str) -> Dict:
        """Валидация всей конфигурации для команды"""
        errors = []
        warnings = []

        unknown = [key for key in config if key not in CONFIG_SECTIONS]
        if unknown:
            errors.append(f"Неизвестные ключи верхнего уровня: {', '.join(sorted(unknown))}")

        for name, defaults in SECTION_DEFAULTS.items():
            section = config.get(name, {})
            if not isinstance(section, dict):
                errors.append(f"Секция {name} должна быть объектом")
                continue
            extra = [key for key in section if key not in defaults]
            if extra:
                errors.append(f"Неизвестные ключи в секции {name}: {', '.join(sorted(extra))}")

        merged = self.merge_defaults({k: v for k, v in config.items() if k in CONFIG_SECTIONS})
        for name in ("metric", "field", "solver", "radii", "measure", "points", command):
            result = self._validate_by_type(merged, name, command)
            errors.extend(result["errors"])
            warnings.extend(result["warnings"])

        self.errors = errors
        self.warnings = warnings
        self.validation_results = {
            "valid": len(errors) == 0,
            "warnings": warnings,
            "errors": errors,
            "config": merged,
        }
        return self.validation_results

    def _validate_by_type(self, config: Dict, section: str, command: str) -> Dict:
        """Валидация секции по типу"""
        if section == "metric":
            return self._validate_metric(config["metric"])
        elif section == "field":
            return self._validate_field(config["field"], command)
        elif section == "solver":
            return self._validate_solver(config["solver"])
        elif section == "radii":
            return self._validate_radii(config["radii"])
        elif section == "measure":
            return self._validate_measure(config["measure"])
        elif section == "points":
            return self._validate_points(config)
        elif section in ("area", "coarea"):
            return self._validate_box(config[section], section)
        elif section == "beta":
            return self._validate_beta(config["beta"])
        else:
            return {"warnings": [], "errors": []}

    def _validate_metric(self, metric: Dict) -> Dict:
        warnings, errors = [], []
        if metric.get("name") != "koranyi":
            errors.append(f"Неизвестная метрика: {metric.get('name')}")
        lam = metric.get("lambda")
        if not _is_number(lam) or lam <= 0:
            errors.append("metric.lambda должна быть положительным числом")
        elif lam > 12:
            warnings.append("При metric.lambda > 12 калибровка не является метрикой")
        return {"warnings": warnings, "errors": errors}

    def _validate_field(self, field: Dict, command: str) -> Dict:
        warnings, errors = [], []
        try:
            name = field.get("name")
            if name is None:
                if command not in COMMANDS_WITHOUT_FIELD:
                    errors.append("Отсутствует обязательный ключ field.name")
            elif name not in FIELD_NAMES:
                errors.append(f"Неизвестное поле: {name} (доступны: {', '.join(FIELD_NAMES)})")

            if name == "linear":
                matrix = field.get("matrix")
                if (not isinstance(matrix, list) or len(matrix) != 2
                        or any(not isinstance(row, list) or len(row) != 2 for row in matrix)
                        or not all(_is_number(v) for row in matrix for v in row)):
                    errors.append("field.matrix должна быть матрицей 2x2 из чисел")

            alpha = field.get("alpha")
            if not _is_number(alpha) or not 0 < alpha <= 1:
                errors.append("field.alpha должна лежать в (0, 1]")
            if field.get("gradient") not in ("analytic", "finite_difference"):
                errors.append("field.gradient: analytic или finite_difference")
            if not _is_number(field.get("step")) or field["step"] <= 0:
                errors.append("field.step должен быть положительным")
            if not _is_number(field.get("coefficient")):
                errors.append("field.coefficient должен быть числом")
        except Exception as e:
            errors.append(f"Ошибка при проверке поля: {str(e)}")
        return {"warnings": warnings, "errors": errors}

    def _validate_solver(self, solver: Dict) -> Dict:
        result = self._validate_positive(solver, "solver", ["delta", "tol", "damping"])
        for key, minimum in (("grid_levels", 4), ("max_iter", 1)):
            value = solver.get(key)
            if not _is_int(value, minimum):
                result["errors"].append(f"solver.{key} должно быть целым >= {minimum}")
        if isinstance(solver.get("grid_levels"), int) and solver["grid_levels"] > 16:
            result["warnings"].append("solver.grid_levels > 16: расчёт может быть долгим")
        if _is_number(solver.get("damping")) and solver["damping"] > 1:
            result["errors"].append("solver.damping должно лежать в (0, 1]")
        if solver.get("error_norm_mode") not in ("full", "dyadic"):
            result["errors"].append("solver.error_norm_mode: full или dyadic")
        return result

    def _validate_radii(self, radii: Dict) -> Dict:
        result = self._validate_positive(radii, "radii",
                                         ["eps_max", "delta_max", "rho_floor", "safety_factor"])
        if not _is_int(radii.get("beta_resolution"), 2):
            result["errors"].append("radii.beta_resolution должно быть целым >= 2")
        return result

    def _validate_beta(self, beta: Dict) -> Dict:
        errors = []
        resolutions = beta.get("resolutions")
        if (not isinstance(resolutions, list) or not resolutions
                or not all(_is_int(value, 2) for value in resolutions)):
            errors.append("beta.resolutions должен быть непустым списком целых >= 2")
        return {"warnings": [], "errors": errors}

    def _validate_measure(self, measure: Dict) -> Dict:
        result = self._validate_positive(measure, "measure", ["level_tol", "tolerance"])
        for key in ("quadrature", "z_samples", "seed_retries", "max_glue_steps", "workers"):
            value = measure.get(key)
            if not _is_int(value, 1):
                result["errors"].append(f"measure.{key} должно быть целым >= 1")
        if measure.get("sampler") not in ("sobol", "halton", "uniform"):
            result["errors"].append("measure.sampler: sobol, halton или uniform")
        return result

    def _validate_points(self, config: Dict) -> Dict:
        errors = []
        for key in ("p", "q"):
            value = config.get(key)
            if value is None and key == "q":
                continue
            if (not isinstance(value, list) or len(value) != 3
                    or not all(_is_number(v) for v in value)):
                errors.append(f"{key} должна быть списком из 3 конечных чисел")
        if not isinstance(config.get("seed"), int) or isinstance(config.get("seed"), bool):
            errors.append("seed должен быть целым числом")
        return {"warnings": [], "errors": errors}

    def _validate_box(self, section: Dict, name: str) -> Dict:
        errors = []
        box = section.get("box")
        if (not isinstance(box, list) or len(box) != 2
                or any(not isinstance(b, list) or len(b) != 3 for b in box)):
            errors.append(f"{name}.box должен быть парой списков из 3 чисел")
        elif any(lo > hi for lo, hi in zip(box[0], box[1])):
            errors.append(f"{name}.box: нижняя граница больше верхней")
        return {"warnings": [], "errors": errors}

    def _validate_positive(self, section: Dict, name: str, keys: List[str]) -> Dict:
        errors = []
        for key in keys:
            value = section.get(key)
            if not _is_number(value) or value <= 0:
                errors.append(f"{name}.{key} должно быть положительным числом")
        return {"warnings": [], "errors": errors}
