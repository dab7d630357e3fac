"""
Heis LSDE - командная строка
Решение уравнений множества уровня в группе Гейзенберга и проверка формул площади и коплощади

Использование:
    heis-lsde <команда> --config <файл> [--out <каталог>] [--seed <n>] [--figures]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config import APP_NAME, EXIT_CODES, OUTPUT_CONFIG
from core.config_validator import ConfigValidator
from core.exceptions import InvalidConfig
from core.experiment_runner import ExperimentRunner
from core.file_processor import FileProcessor
from components.report_generator import ReportGenerator
from utils.constants import COMMANDS, ERROR_MESSAGES, HELP_TEXT, VERSION_INFO

logger = logging.getLogger(APP_NAME)


def build_parser() -> argparse.ArgumentParser:
    """Парсер аргументов с подкомандами"""
    parser = argparse.ArgumentParser(prog=APP_NAME, description=VERSION_INFO["description"])
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION_INFO['version']}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=HELP_TEXT[command])
        sub.add_argument("--config", required=True, type=Path, help="JSON конфигурация запуска")
        sub.add_argument("--out", type=Path, default=None,
                         help="Каталог результатов (по умолчанию runs/<команда>)")
        sub.add_argument("--seed", type=int, default=None, help="Переопределить seed конфигурации")
        sub.add_argument("--figures", action="store_true", help="Записать графики plotly в JSON")
        verbosity = sub.add_mutually_exclusive_group()
        verbosity.add_argument("-v", "--verbose", action="store_true", help="Подробный журнал")
        verbosity.add_argument("-q", "--quiet", action="store_true", help="Только предупреждения")
    return parser


def setup_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def load_config(path: Path, command: str, seed: Optional[int], processor: FileProcessor) -> dict:
    """Чтение и валидация конфигурации; seed из командной строки имеет приоритет"""
    raw = processor.load_config(path)
    if seed is not None:
        raw["seed"] = seed
    validation = ConfigValidator().validate_all(raw, command)
    for warning in validation["warnings"]:
        logger.warning(warning)
    if not validation["valid"]:
        raise InvalidConfig(ERROR_MESSAGES["config_invalid"], validation["errors"])
    return validation["config"]


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа heis-lsde; возвращает код завершения"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.quiet)

    out_dir = args.out or Path(OUTPUT_CONFIG["default_out"]) / args.command
    processor = FileProcessor()
    try:
        config = load_config(args.config, args.command, args.seed, processor)
    except InvalidConfig as e:
        logger.error("%s", e)
        for error in e.errors:
            logger.error("  - %s", error)
        return EXIT_CODES["invalid_config"]

    runner = ExperimentRunner(config, out_dir, processor)
    results = runner.run(args.command)

    try:
        ReportGenerator(out_dir, processor).generate(
            args.command, results, config, runner.artifacts, figures=args.figures,
        )
    except OSError as e:
        logger.error("Не удалось записать каталог запуска %s: %s", out_dir, e)
        return EXIT_CODES["failure"]

    if results["error"]:
        print(results["error"], file=sys.stderr)
    return int(results["status"])


if __name__ == "__main__":
    sys.exit(main())
