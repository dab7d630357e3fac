# Core модуль Heis LSDE

from .exceptions import (
    LSDEError,
    DegeneratePoint,
    NoAdmissibleRadii,
    NonConvergence,
    NotFound,
    SeedNotFound,
    PointOffCurve,
    InvalidConfig,
    TraceFormatError
)
from .hgroup import HPoint, MetricConfig, GeometryConstants
from .sewing import SampledFunction, Germ, SewingResult
from .field import FieldModel, build_field
from .config_validator import ConfigValidator

__all__ = [
    'LSDEError',
    'DegeneratePoint',
    'NoAdmissibleRadii',
    'NonConvergence',
    'NotFound',
    'SeedNotFound',
    'PointOffCurve',
    'InvalidConfig',
    'TraceFormatError',
    'HPoint',
    'MetricConfig',
    'GeometryConstants',
    'SampledFunction',
    'Germ',
    'SewingResult',
    'FieldModel',
    'build_field',
    'ConfigValidator'
]
