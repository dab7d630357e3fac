# Analyzers модуль Heis LSDE

from .lsde_solver import SolverConfig, Trace, RadiiCertificate, admissible_radii, solve
from .trace_analyzer import TraceAnalyzer
from .measure_analyzer import HBox, MeasureReport, CurveMeasure, LevelSetIntegrator

__all__ = [
    'SolverConfig',
    'Trace',
    'RadiiCertificate',
    'admissible_radii',
    'solve',
    'TraceAnalyzer',
    'HBox',
    'MeasureReport',
    'CurveMeasure',
    'LevelSetIntegrator'
]
