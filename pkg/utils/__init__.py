# Utils модуль Heis LSDE

from .helpers import (
    format_number,
    safe_divide,
    relative_error,
    derive_seeds,
    to_serializable
)

from .formatters import (
    DataFormatter,
    ChartFormatter,
    ReportFormatter
)

from .constants import (
    COMMANDS,
    DEFAULT_COLORS,
    CHART_CONFIGS,
    VERSION_INFO
)

__all__ = [
    # Helper functions
    'format_number',
    'safe_divide',
    'relative_error',
    'derive_seeds',
    'to_serializable',

    # Formatter classes
    'DataFormatter',
    'ChartFormatter',
    'ReportFormatter',

    # Constants
    'COMMANDS',
    'DEFAULT_COLORS',
    'CHART_CONFIGS',
    'VERSION_INFO'
]
