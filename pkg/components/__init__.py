# Components модуль Heis LSDE

from .charts import Charts
from .report_generator import ReportGenerator

__all__ = [
    'Charts',
    'ReportGenerator'
]
