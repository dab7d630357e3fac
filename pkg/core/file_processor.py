import json
import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from config import OUTPUT_CONFIG
from core.exceptions import InvalidConfig, TraceFormatError
from core.hgroup import HPoint, MetricConfig
from core.sewing import SampledFunction
from analyzers.lsde_solver import Trace
from utils.constants import ERROR_MESSAGES, SAMPLED_COLUMNS, TRACE_COLUMNS
from utils.helpers import to_serializable

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FileProcessor:
    """Класс для чтения и записи кривых, таблиц и конфигураций"""

    def __init__(self, float_format: str = OUTPUT_CONFIG["float_format"],
                 line_terminator: str = OUTPUT_CONFIG["line_terminator"]):
        self.float_format = float_format
        self.line_terminator = line_terminator
        self.written: Dict[str, Path] = {}

    def load_config(self, path: PathLike) -> Dict:
        """Загрузка JSON конфигурации"""
        path = Path(path)
        if not path.is_file():
            raise InvalidConfig(ERROR_MESSAGES["config_not_found"].format(path=path))
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise InvalidConfig(ERROR_MESSAGES["config_parse"].format(error=e)) from e
        if not isinstance(data, dict):
            raise InvalidConfig(ERROR_MESSAGES["config_parse"].format(error="ожидался объект"))
        return data

    def save_frame(self, df: pd.DataFrame, path: PathLike) -> Path:
        """Запись таблицы в CSV с полной точностью"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format=self.float_format,
                  lineterminator=self.line_terminator)
        self.written[path.name] = path
        return path

    def save_json(self, data: Dict, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(to_serializable(data), sort_keys=True,
                          indent=OUTPUT_CONFIG["json_indent"], ensure_ascii=False)
        path.write_text(text + "\n", encoding="utf-8")
        self.written[path.name] = path
        return path

    def save_trace(self, trace: Trace, path: PathLike) -> Path:
        return self.save_frame(trace.to_frame(), path)

    def _read_csv(self, path: PathLike) -> pd.DataFrame:
        path = Path(path)
        if not path.is_file():
            raise TraceFormatError(f"Файл не найден: {path}")
        try:
            df = pd.read_csv(path)
        except pd.errors.EmptyDataError as e:
            raise TraceFormatError(ERROR_MESSAGES["trace_empty"].format(path=path)) from e
        if df.empty:
            raise TraceFormatError(ERROR_MESSAGES["trace_empty"].format(path=path))
        return df

    def load_trace(self, path: PathLike, base_point: Optional[HPoint] = None,
                   alpha: float = 1.0, metric: Optional[MetricConfig] = None) -> Trace:
        """
        Загрузка кривой из CSV с колонками t, x1, x2, x3

        Опорная точка gamma_0 - узел с наименьшим |t|; база p по умолчанию
        совпадает с ней.
        """
        df = self._read_csv(path)
        missing = [column for column in TRACE_COLUMNS if column not in df.columns]
        if missing:
            raise TraceFormatError(ERROR_MESSAGES["trace_columns"].format(columns=", ".join(missing)))
        values = df[TRACE_COLUMNS].to_numpy(dtype=float)
        if not np.all(np.isfinite(values)):
            raise TraceFormatError(f"Файл кривой содержит нечисловые значения: {path}")

        times, points = values[:, 0], values[:, 1:]
        try:
            center = int(np.argmin(np.abs(times)))
            start = HPoint.from_array(points[center])
            trace = Trace(
                times=times,
                path=points,
                base_point=base_point or start,
                start=start,
                alpha=alpha,
                delta=float(max(-times[0], times[-1])),
                metric=metric or MetricConfig(),
                converged=True,
            )
        except ValueError as e:
            raise TraceFormatError(f"Некорректная кривая в {path}: {e}") from e
        logger.info("Загружена кривая из %s: %d узлов", path, len(trace))
        return trace

    def save_sampled_function(self, f: SampledFunction, path: PathLike) -> Path:
        if f.is_vector:
            columns = {f"value_{k + 1}": f.values[:, k] for k in range(f.values.shape[1])}
        else:
            columns = {"value": f.values}
        return self.save_frame(pd.DataFrame({"t": f.times, **columns}), path)

    def load_sampled_function(self, path: PathLike) -> SampledFunction:
        df = self._read_csv(path)
        if "t" not in df.columns:
            raise TraceFormatError(f"В файле отсутствует колонка t: {path}")
        value_columns = [column for column in df.columns if column.startswith("value")]
        if not value_columns:
            raise TraceFormatError(f"В файле нет колонок значений ({SAMPLED_COLUMNS[1]}): {path}")
        values = df[value_columns].to_numpy(dtype=float)
        if value_columns == ["value"]:
            values = values[:, 0]
        try:
            return SampledFunction(df["t"].to_numpy(dtype=float), values)
        except ValueError as e:
            raise TraceFormatError(f"Некорректная функция в {path}: {e}") from e
