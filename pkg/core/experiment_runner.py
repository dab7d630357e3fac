import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config import EXIT_CODES
from core.exceptions import (
    DegeneratePoint, InvalidConfig, LSDEError, NonConvergence, TraceFormatError,
)
from core.field import FieldModel, blowup_deviation, build_field, perturb, point_from_config, vertical_field
from core.file_processor import FileProcessor
from core.hgroup import MetricConfig, beta_d, equivalence_constant
from analyzers.lsde_solver import SolverConfig, Trace, admissible_radii, solve
from analyzers.measure_analyzer import (
    CurveMeasure, HBox, area_measure, coarea_check, extrapolate_density,
    federer_density_profile, functional_density_check, sph_measure_upper,
)
from analyzers.trace_analyzer import TraceAnalyzer, stability_run
from utils.constants import BLOWUP_COLUMNS, COMMANDS, ERROR_MESSAGES, OUTPUT_FILES

logger = logging.getLogger(__name__)


class ExperimentRunner:
    """Запуск экспериментов CLI по проверенной конфигурации"""

    def __init__(self, config: Dict, out_dir: Path, file_processor: Optional[FileProcessor] = None):
        self.config = config
        self.out_dir = Path(out_dir)
        self.file_processor = file_processor or FileProcessor()
        self.seed = int(config.get("seed", 0))
        self.metric = MetricConfig.from_dict(config["metric"])
        self.solver_cfg = SolverConfig.from_dict(config["solver"])
        self.artifacts: Dict = {}

    def run(self, command: str) -> Dict:
        """
        Выполнение команды

        Returns:
            Словарь {status, summary, checks, outputs, error}; status - код завершения
        """
        results = {
            "status": EXIT_CODES["success"],
            "summary": {},
            "checks": {},
            "outputs": [],
            "error": None,
        }
        if command not in COMMANDS:
            results["status"] = EXIT_CODES["invalid_config"]
            results["error"] = f"Неизвестная команда: {command}"
            return results

        handler = getattr(self, f"_run_{command}")
        try:
            handler(results)
        except (InvalidConfig, TraceFormatError) as e:
            results["status"] = EXIT_CODES["invalid_config"]
            results["error"] = str(e)
        except DegeneratePoint as e:
            results["status"] = EXIT_CODES["failure"]
            results["error"] = ERROR_MESSAGES["degenerate"].format(error=e)
        except NonConvergence as e:
            results["status"] = EXIT_CODES["failure"]
            results["error"] = ERROR_MESSAGES["nonconvergence"].format(error=e)
        except LSDEError as e:
            results["status"] = EXIT_CODES["failure"]
            results["error"] = f"{type(e).__name__}: {e}"
        except ValueError as e:
            results["status"] = EXIT_CODES["invalid_config"]
            results["error"] = f"Некорректные параметры: {e}"

        failed = [name for name, check in results["checks"].items() if not check.get("passed")]
        if failed and results["status"] == EXIT_CODES["success"]:
            results["status"] = EXIT_CODES["failure"]
            results["error"] = ERROR_MESSAGES["check_failed"].format(checks=", ".join(failed))

        results["outputs"] = sorted(self.file_processor.written)
        if results["error"]:
            logger.error("%s: %s", command, results["error"])
        else:
            logger.info("%s: готово, файлов %d", command, len(results["outputs"]))
        return results

    # Общие шаги

    def _field(self) -> FieldModel:
        return build_field(self.config["field"])

    def _points(self):
        p = point_from_config(self.config.get("p"), "p")
        q = point_from_config(self.config["q"], "q") if self.config.get("q") is not None else p
        return p, q

    def _solve(self, F: FieldModel, certificate: bool) -> Trace:
        p, q = self._points()
        radii = None
        if certificate:
            radii = admissible_radii(F, p, self.metric, radii_cfg=self.config["radii"], seed=self.seed)
        trace = solve(F, p, q, self.solver_cfg, self.metric, certificate=radii)
        self.artifacts["trace"] = trace
        return trace

    def _path(self, command: str, index: int) -> Path:
        return self.out_dir / OUTPUT_FILES[command][index]

    # Команды

    def _run_trace(self, results: Dict):
        settings = self.config["trace"]
        F = self._field()
        trace = self._solve(F, bool(settings["certificate"]))
        self.file_processor.save_trace(trace, self._path("trace", 0))

        analyzer = TraceAnalyzer(F, trace, self.solver_cfg, thresholds=settings)
        checks = {
            "residuals": analyzer.get_residual_analysis(),
            "injectivity": analyzer.get_injectivity_analysis(),
            "modulus": analyzer.get_modulus_analysis(),
        }
        diagnostics = {
            **trace.diagnostics(),
            "certificate": trace.certificate.to_dict() if trace.certificate else None,
            "checks": checks,
        }
        self.file_processor.save_json(diagnostics, self._path("trace", 1))

        results["checks"] = checks
        results["summary"] = {
            "iterations": trace.iterations,
            "delta": trace.delta,
            "nodes": len(trace),
            "residual_h": trace.residual_h,
            "error_norm": trace.error_norm,
            "levelset_drift": trace.levelset_drift,
        }
        if trace.certificate is not None:
            results["summary"].update({
                "eps0": trace.certificate.eps0,
                "delta0": trace.certificate.delta0,
                "rho0": trace.certificate.rho0,
            })

    def _run_verify(self, results: Dict):
        settings = self.config["verify"]
        F = self._field()
        if settings.get("trace_file"):
            p, _ = self._points()
            trace = self.file_processor.load_trace(
                settings["trace_file"], base_point=p, alpha=F.alpha, metric=self.metric,
            )
            self.artifacts["trace"] = trace
        else:
            trace = self._solve(F, certificate=False)

        analyzer = TraceAnalyzer(F, trace, self.solver_cfg, thresholds=settings)
        report = analyzer.get_summary_metrics(self.seed)
        self.file_processor.save_json(
            {"checks": report["checks"], "passed": report["passed"], "failed": report["failed"],
             "nodes": len(trace), "mesh": trace.mesh},
            self._path("verify", 0),
        )
        results["checks"] = report["checks"]
        results["summary"] = {"nodes": len(trace), "passed": report["passed"]}

    def _run_area(self, results: Dict):
        settings = self.config["area"]
        F = self._field()
        trace = self._solve(F, certificate=False)
        box = HBox.from_bounds(settings["box"])
        beta = beta_d(self.metric, int(self.config["radii"]["beta_resolution"]))

        length = area_measure(trace, box)
        upper = [
            {"mesh": mesh, "sph_upper": sph_measure_upper(trace, mesh, beta)}
            for mesh in settings["meshes"]
        ]
        point = settings.get("point")
        x = trace.start if point is None else point_from_config(point, "area.point")
        measure = CurveMeasure(trace, refine=int(self.config["measure"]["refine"]))
        profile = federer_density_profile(
            measure, x, settings["radii"], int(self.config["measure"]["center_samples"]),
            self.seed, beta,
        )
        density = extrapolate_density(profile)

        self.file_processor.save_json(
            {"area_measure": length, "beta_d": beta, "sph_upper": upper,
             "federer_density": density, "point": list(x), "box": box.to_list()},
            self._path("area", 0),
        )
        self.file_processor.save_frame(profile, self._path("area", 1))
        self.artifacts["profile"] = profile
        results["summary"] = {
            "area_measure": length,
            "sph_upper": upper[-1]["sph_upper"] if upper else None,
            "federer_density": density,
            "beta_d": beta,
        }

    def _run_coarea(self, results: Dict):
        settings = self.config["coarea"]
        measure_cfg = self.config["measure"]
        F = self._field()
        box = HBox.from_bounds(settings["box"])
        report, frame = coarea_check(
            F, box, int(measure_cfg["z_samples"]), self.solver_cfg, self.seed, self.metric,
            measure_cfg,
        )
        self.file_processor.save_json(report.to_dict(), self._path("coarea", 0))
        if settings["csv"]:
            self.file_processor.save_frame(frame, self._path("coarea", 1))
        self.artifacts["coarea"] = frame

        tolerance = float(measure_cfg["tolerance"])
        results["summary"] = {
            "lhs": report.lhs,
            "rhs": report.rhs,
            "rel_error": report.rel_error,
            "standard_error": report.standard_error,
            "skipped": report.skipped,
        }
        if report.rel_error > tolerance:
            results["status"] = EXIT_CODES["failure"]
            results["error"] = ERROR_MESSAGES["coarea_tolerance"].format(
                error=report.rel_error, tolerance=tolerance
            )

    def _run_beta(self, results: Dict):
        settings = self.config["beta"]
        values = [
            {"resolution": int(resolution), "beta_d": beta_d(self.metric, int(resolution))}
            for resolution in settings["resolutions"]
        ]
        c_equiv = equivalence_constant(
            self.metric, int(self.config["radii"]["equivalence_samples"]), self.seed
        )
        self.file_processor.save_json(
            {"metric": self.metric.to_dict(), "beta_d": values, "c_equiv": c_equiv},
            self._path("beta", 0),
        )
        results["summary"] = {"beta_d": values[-1]["beta_d"] if values else None,
                              "c_equiv": c_equiv}

    def _run_blowup(self, results: Dict):
        settings = self.config["blowup"]
        F = self._field()
        p, q = self._points()

        rows = [
            blowup_deviation(F, p, float(r), int(settings["samples"]), self.seed, self.metric)
            for r in settings["radii"]
        ]
        frame = pd.DataFrame(rows)[BLOWUP_COLUMNS]
        self.file_processor.save_frame(frame, self._path("blowup", 0))
        self.artifacts["blowup"] = frame

        sequence = [perturb(F, vertical_field(F.alpha), 1.0 / n) for n in settings["stability"]]
        stability: List[Dict] = stability_run(sequence, F, p, q, self.solver_cfg, self.metric)
        for row, n in zip(stability, settings["stability"]):
            row["n"] = n

        functional = None
        if settings["functional"]:
            functional = functional_density_check(
                F, p, settings["radii"], float(settings["functional_eps"]),
                int(settings["functional_z_samples"]), self.solver_cfg, self.seed, self.metric,
                self.config["measure"],
            )

        self.file_processor.save_json(
            {"deviation": rows, "stability": stability, "functional": functional},
            self._path("blowup", 1),
        )
        results["summary"] = {
            "sup_deviation_min": float(frame["sup_deviation"].min()),
            "sup_deviation_max": float(frame["sup_deviation"].max()),
            "stability_converged": sum(bool(row["converged"]) for row in stability),
        }
