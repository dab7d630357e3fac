import hashlib
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, Optional

from core.file_processor import FileProcessor
from utils.constants import VERSION_INFO
from utils.formatters import ReportFormatter

from .charts import Charts

logger = logging.getLogger(__name__)


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class ReportGenerator:
    """Компонент для сборки каталога запуска"""

    def __init__(self, out_dir: Path, file_processor: Optional[FileProcessor] = None):
        self.out_dir = Path(out_dir)
        self.file_processor = file_processor or FileProcessor()
        self.formatter = ReportFormatter()

    def write_config(self, config: Dict) -> Path:
        """Эхо итоговой конфигурации"""
        return self.file_processor.save_json(config, self.out_dir / "config.json")

    def write_summary(self, command: str, results: Dict, config: Optional[Dict] = None) -> Path:
        path = self.out_dir / "summary.md"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.formatter.generate_summary(command, results, config), encoding="utf-8")
        return path

    def write_figures(self, artifacts: Dict) -> Dict[str, Path]:
        return Charts().save_all(artifacts, self.out_dir / "figures")

    def write_manifest(self, command: str, results: Dict, seed: int,
                       paths: Iterable[Path]) -> Path:
        """
        Манифест запуска: SHA-256 файлов, записанных этим запуском, команда, seed, версия

        Поле timestamp единственное меняется между повторными запусками.
        """
        files = {
            Path(path).relative_to(self.out_dir).as_posix(): file_sha256(Path(path))
            for path in sorted(set(paths))
        }

        manifest = {
            "command": command,
            "seed": seed,
            "status": results.get("status"),
            "version": VERSION_INFO["version"],
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "files": files,
        }
        return self.file_processor.save_json(manifest, self.out_dir / "manifest.json")

    def generate(self, command: str, results: Dict, config: Dict, artifacts: Optional[Dict] = None,
                 figures: bool = False) -> Path:
        """Полный каталог запуска; возвращает путь к манифесту"""
        self.write_config(config)
        paths = list(self.file_processor.written.values())
        paths.append(self.write_summary(command, results, config))
        if figures and artifacts:
            written = self.write_figures(artifacts)
            paths.extend(written.values())
            logger.info("Записано графиков: %d", len(written))
        manifest = self.write_manifest(command, results, int(config.get("seed", 0)), paths)
        logger.info("Каталог запуска: %s", self.out_dir)
        return manifest
