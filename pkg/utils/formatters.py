from typing import Any, Dict, List, Optional

import pandas as pd
import plotly.graph_objects as go

from .constants import DEFAULT_COLORS, VERSION_INFO
from .helpers import format_number


class DataFormatter:
    """Класс для форматирования результатов расчётов"""

    def __init__(self, decimal_places: int = 6):
        self.decimal_places = decimal_places

    def format_metrics_dict(self, metrics: Dict[str, Any]) -> Dict[str, str]:
        """Форматирование плоского словаря метрик"""
        formatted = {}
        for key, value in metrics.items():
            if isinstance(value, (dict, list)):
                continue
            formatted[key] = self._format_single_value(value)
        return formatted

    def create_checks_table(self, checks: Dict[str, Dict]) -> pd.DataFrame:
        """Таблица проверок: имя, итог, ключевая величина"""
        rows = []
        for name, check in checks.items():
            value_key = next(
                (key for key in ("margin", "max_gap", "sup_distance", "residual_h", "holder_h")
                 if check.get(key) is not None),
                None,
            )
            rows.append({
                "Проверка": name,
                "Итог": "пройдена" if check.get("passed") else "не пройдена",
                "Величина": value_key or "",
                "Значение": self._format_single_value(check.get(value_key)) if value_key else "",
                "Ошибка": check.get("error", ""),
            })
        return pd.DataFrame(rows, columns=["Проверка", "Итог", "Величина", "Значение", "Ошибка"])

    def _format_single_value(self, value: Any) -> str:
        if isinstance(value, bool):
            return "да" if value else "нет"
        if isinstance(value, (int, float)):
            return format_number(value, self.decimal_places)
        return "N/A" if value is None else str(value)


class ChartFormatter:
    """Класс для форматирования графиков"""

    def __init__(self):
        self.default_colors = DEFAULT_COLORS

    def apply_theme(self, fig: go.Figure) -> go.Figure:
        """Применение темы к графику"""
        fig.update_layout(
            font=dict(family="Arial, sans-serif", size=12, color="#333"),
            plot_bgcolor='rgba(0,0,0,0)',
            paper_bgcolor='rgba(0,0,0,0)',
            margin=dict(l=50, r=50, t=60, b=50),
            colorway=self.default_colors,
        )
        return fig

    def log_axes(self, fig: go.Figure) -> go.Figure:
        fig.update_xaxes(type="log")
        fig.update_yaxes(type="log")
        return fig


class ReportFormatter:
    """Класс для форматирования отчётов в markdown"""

    def __init__(self):
        self.data_formatter = DataFormatter()

    def generate_summary(self, command: str, results: Dict, config: Optional[Dict] = None) -> str:
        """Сводка запуска: статус, ключевые величины, таблица проверок"""
        status = results.get("status", 0)
        lines = [
            f"# Heis LSDE: {command}",
            "",
            f"- **Версия:** {VERSION_INFO['version']}",
            f"- **Код завершения:** {status}",
        ]
        if config is not None:
            lines.append(f"- **Seed:** {config.get('seed', 0)}")
            field = config.get("field", {}).get("name")
            if field:
                lines.append(f"- **Поле:** {field}")
        if results.get("error"):
            lines.append(f"- **Ошибка:** {results['error']}")

        metrics = self.data_formatter.format_metrics_dict(results.get("summary", {}))
        if metrics:
            lines += ["", "## Результаты", "", "| Величина | Значение |", "|---|---|"]
            lines += [f"| {key} | {value} |" for key, value in metrics.items()]

        checks = results.get("checks")
        if checks:
            table = self.data_formatter.create_checks_table(checks)
            lines += ["", "## Проверки", "", self._markdown_table(table)]
        return "\n".join(lines) + "\n"

    def _markdown_table(self, df: pd.DataFrame) -> str:
        header = "| " + " | ".join(df.columns) + " |"
        divider = "|" + "---|" * len(df.columns)
        body: List[str] = [
            "| " + " | ".join(str(value) for value in row) + " |"
            for row in df.itertuples(index=False)
        ]
        return "\n".join([header, divider] + body)
