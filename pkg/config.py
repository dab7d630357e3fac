# Конфигурация Heis LSDE

# Настройки приложения
APP_NAME = "heis-lsde"

# Метрика группы Гейзенберга (калибровка Кораньи)
METRIC_CONFIG = {
    "name": "koranyi",      # Единственная поддерживаемая калибровка
    "lambda": 4.0           # Вес вертикальной компоненты: N = (|z^h|^4 + lambda*z3^2)^(1/4)
}

# Поле F: H -> R^2
FIELD_CONFIG = {
    "alpha": 1.0,               # Показатель Гёльдера горизонтального градиента
    "gradient": "analytic",     # analytic | finite_difference
    "step": 1e-5,               # Шаг конечных разностей вдоль X1, X2
    "matrix": None,             # Матрица 2x2 для поля linear
    "coefficient": 1.0          # Коэффициент c для поля twisted
}

FIELD_NAMES = ["projection", "linear", "shear", "vertical", "twisted", "degenerate"]

# Параметры решателя LSDE
SOLVER_CONFIG = {
    "delta": 0.1,               # Полуширина интервала [-delta, delta]
    "grid_levels": 10,          # Сетка из 2^L + 1 узлов
    "tol": 1e-10,               # Порог sup-изменения итерации Пикара
    "max_iter": 60,             # Максимум итераций на одну попытку
    "damping": 1.0,             # Коэффициент демпфирования обновления
    "halving_retries": 3,       # Число повторов с delta/2 при расходимости
    "error_norm_mode": "full",  # full | dyadic (для L > 12)
    "ill_conditioned": 1e8,     # Порог числа обусловленности градиента
    "divergence_limit": 1e6     # sup-изменение, после которого итерация считается расходящейся
}

# Поиск допустимых радиусов (eps0, delta0, rho0)
RADII_CONFIG = {
    "eps_max": 0.5,             # Стартовый eps, далее деление пополам
    "eps_halvings": 12,         # Число делений eps
    "delta_max": 0.5,           # Верхняя граница delta0
    "rho_floor": 3.0,           # Нижняя граница rho0
    "safety_factor": 1.5,       # Запас к выборочной оценке константы Гёльдера
    "holder_samples": 2000,     # Пары точек для оценки константы Гёльдера
    "equivalence_samples": 10000,  # Пары для константы эквивалентности калибровок
    "beta_resolution": 32,      # Разрешение сетки для beta_d
    "strict_margin": 0.01       # Запас для строгих неравенств
}

# Меры, плотности и коплощадь
MEASURE_CONFIG = {
    "quadrature": 64,           # Узлы Гаусса-Лежандра на ось для левой части
    "z_samples": 2000,          # Выборка значений z для правой части
    "sampler": "sobol",         # sobol | halton | uniform
    "seed_retries": 32,         # Стартовые точки для поиска затравки на уровне
    "max_glue_steps": 64,       # Максимум склеек локальных решений в одну сторону
    "workers": 4,               # Потоки для выборки по z и квадратуры
    "level_tol": 1e-9,          # Допуск принадлежности множеству уровня
    "image_grid": 17,           # Сетка на ящике для прямоугольника значений F
    "image_padding": 0.02,      # Относительное расширение прямоугольника значений
    "center_samples": 64,       # Центры шаров для плотности Федерера
    "refine": 64,               # Сгущение кривой: шаг <= rho^2 / refine
    "tolerance": 0.03           # Допустимая относительная ошибка коплощади
}

# Значения по умолчанию для команд CLI
EXPERIMENT_DEFAULTS = {
    "trace": {
        "residual_tol": 1e-8,   # Порог невязки горизонтального уравнения
        "drift_tol": 1e-8,      # Порог дрейфа F вдоль кривой
        "certificate": True     # Искать допустимые радиусы перед решением
    },
    "verify": {
        "trace_file": None,     # CSV с готовой кривой вместо решения
        "fine_levels": 2,       # Дополнительные уровни сетки для единственности
        "surjectivity_eps": 0.2,
        "surjectivity_samples": 1000,
        "uniqueness_tol": 1e-6,
        "residual_tol": 1e-8,
        "drift_tol": 1e-8
    },
    "area": {
        "box": [[-0.05, -1.0, -0.05], [0.05, 1.0, 0.05]],
        "meshes": [0.02, 0.01, 0.005],
        "radii": [0.08, 0.04, 0.02, 0.01],
        "point": None           # Точка для плотности Федерера (по умолчанию gamma_0)
    },
    "coarea": {
        "box": [[-0.5, -0.5, -0.5], [0.5, 0.5, 0.5]],
        "csv": True
    },
    "beta": {
        "resolutions": [16, 32, 64]
    },
    "blowup": {
        "radii": [0.5, 0.25, 0.125, 0.0625],
        "samples": 2000,
        "functional": False,    # Проверка r^-4 int u(delta_r x) d nu
        "functional_eps": 0.5,
        "functional_z_samples": 256,
        "stability": [4, 16, 64]  # n для полей F + (0, x3)/n
    }
}

# Коды завершения CLI
EXIT_CODES = {
    "success": 0,
    "failure": 2,
    "invalid_config": 3
}

# Настройки вывода
OUTPUT_CONFIG = {
    "float_format": "%.17g",
    "line_terminator": "\n",
    "json_indent": 2,
    "default_out": "runs"
}

# Допустимые ключи верхнего уровня пользовательской конфигурации
CONFIG_SECTIONS = [
    "metric", "field", "solver", "radii", "measure", "p", "q", "seed",
    "trace", "verify", "area", "coarea", "beta", "blowup"
]
