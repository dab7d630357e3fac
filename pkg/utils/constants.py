# Константы для Heis LSDE

# Колонки табличных файлов
TRACE_COLUMNS = ["t", "x1", "x2", "x3"]
SAMPLED_COLUMNS = ["t", "value"]
COAREA_COLUMNS = ["z1", "z2", "contribution"]
BLOWUP_COLUMNS = ["r", "sup_deviation", "gradient_deviation"]
PROFILE_COLUMNS = ["radius", "density"]

# Имена выходных файлов по командам
OUTPUT_FILES = {
    "trace": ["trace.csv", "diagnostics.json"],
    "verify": ["verify.json"],
    "area": ["area.json", "density_profile.csv"],
    "coarea": ["coarea.json", "coarea_samples.csv"],
    "beta": ["beta.json"],
    "blowup": ["blowup.csv", "blowup.json"]
}

COMMANDS = list(OUTPUT_FILES.keys())

# Сообщения об ошибках
ERROR_MESSAGES = {
    "config_not_found": "Файл конфигурации не найден: {path}",
    "config_parse": "Не удалось разобрать JSON конфигурации: {error}",
    "config_invalid": "Конфигурация не прошла валидацию",
    "trace_empty": "Файл кривой пуст: {path}",
    "trace_columns": "В файле кривой отсутствуют колонки: {columns}",
    "degenerate": "Вырожденная точка: {error}",
    "nonconvergence": "Решатель не сошёлся: {error}",
    "check_failed": "Проверки не пройдены: {checks}",
    "coarea_tolerance": "Относительная ошибка коплощади {error:.4g} превышает допуск {tolerance:.4g}"
}

# Цвета графиков
DEFAULT_COLORS = [
    '#1f77b4',  # Синий
    '#ff7f0e',  # Оранжевый
    '#2ca02c',  # Зеленый
    '#d62728',  # Красный
    '#9467bd'   # Фиолетовый
]

CHART_CONFIGS = {
    "trace": {"height": 600, "line_width": 4},
    "coarea": {"height": 500, "marker_size": 5, "colorscale": "Viridis"},
    "blowup": {"height": 450},
    "profile": {"height": 450}
}

# Информация о версии
VERSION_INFO = {
    "version": "0.1.0",
    "release_date": "2026-10-19",
    "description": "Решение уравнений множества уровня в группе Гейзенберга и проверка формулы коплощади"
}

# Справка по командам
HELP_TEXT = {
    "trace": "Решить LSDE через точку q и сохранить кривую с диагностикой",
    "verify": "Проверить решение: невязки, инъективность, модуль, сюръективность, единственность",
    "area": "Мера кривой в ящике, верхняя оценка сферической меры, плотность Федерера",
    "coarea": "Сравнить обе стороны формулы коплощади на ящике",
    "beta": "Оценить beta_d и константу эквивалентности калибровок",
    "blowup": "Отклонение раздутий поля от линеаризации и устойчивость решений"
}
