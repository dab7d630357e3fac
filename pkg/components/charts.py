import logging
from pathlib import Path
from typing import Dict

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from analyzers.lsde_solver import Trace
from utils.constants import CHART_CONFIGS
from utils.formatters import ChartFormatter

logger = logging.getLogger(__name__)


class Charts:
    """Компонент для построения графиков по результатам запуска"""

    def __init__(self):
        self.formatter = ChartFormatter()

    def trace_chart(self, trace: Trace) -> go.Figure:
        """Кривая уровня в координатах (x1, x2, x3), цвет - параметр t"""
        settings = CHART_CONFIGS["trace"]
        fig = go.Figure(go.Scatter3d(
            x=trace.path[:, 0],
            y=trace.path[:, 1],
            z=trace.path[:, 2],
            mode="lines",
            line=dict(width=settings["line_width"], color=trace.times, colorscale="Viridis"),
            name="gamma",
        ))
        fig.add_trace(go.Scatter3d(
            x=[trace.start.x1], y=[trace.start.x2], z=[trace.start.x3],
            mode="markers", marker=dict(size=5), name="gamma_0",
        ))
        fig.update_layout(
            title="Решение LSDE",
            height=settings["height"],
            scene=dict(xaxis_title="x1", yaxis_title="x2", zaxis_title="x3"),
        )
        return self.formatter.apply_theme(fig)

    def coarea_chart(self, frame: pd.DataFrame) -> go.Figure:
        """Вклады S^2(F^-1(z) ∩ box) по точкам z"""
        settings = CHART_CONFIGS["coarea"]
        fig = px.scatter(
            frame, x="z1", y="z2", color="contribution",
            color_continuous_scale=settings["colorscale"],
            title="Мера множеств уровня по значениям z",
        )
        fig.update_traces(marker=dict(size=settings["marker_size"]))
        fig.update_layout(height=settings["height"])
        return self.formatter.apply_theme(fig)

    def blowup_chart(self, frame: pd.DataFrame) -> go.Figure:
        fig = go.Figure()
        for column in ("sup_deviation", "gradient_deviation"):
            fig.add_trace(go.Scatter(x=frame["r"], y=frame[column], mode="lines+markers", name=column))
        fig.update_layout(title="Отклонение раздутий от линеаризации",
                          xaxis_title="r", yaxis_title="отклонение",
                          height=CHART_CONFIGS["blowup"]["height"])
        return self.formatter.log_axes(self.formatter.apply_theme(fig))

    def profile_chart(self, profile: pd.DataFrame) -> go.Figure:
        fig = px.line(profile, x="radius", y="density", markers=True,
                      title="Профиль плотности Федерера")
        fig.update_layout(height=CHART_CONFIGS["profile"]["height"])
        return self.formatter.apply_theme(fig)

    def build_all(self, artifacts: Dict) -> Dict[str, go.Figure]:
        """Графики для всех доступных артефактов запуска"""
        builders = {
            "trace": self.trace_chart,
            "coarea": self.coarea_chart,
            "blowup": self.blowup_chart,
            "profile": self.profile_chart,
        }
        figures = {}
        for name, builder in builders.items():
            if name not in artifacts:
                continue
            try:
                figures[name] = builder(artifacts[name])
            except Exception as e:
                logger.warning("Не удалось построить график %s: %s", name, e)
        return figures

    def save_all(self, artifacts: Dict, directory: Path) -> Dict[str, Path]:
        """Запись графиков в JSON (plotly)"""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = {}
        for name, fig in self.build_all(artifacts).items():
            path = directory / f"{name}.json"
            fig.write_json(str(path))
            written[name] = path
        return written
