"""Joint lower-tail statistics of two received-power traces via extreme value theory."""

from .config import PipelineConfig, load_config
from .core import GpdParams, PowerSeries
from .errors import (ConfigError, DomainError, FitError, IngestError, InsufficientData,
                     StageError)
from .pipeline import PipelineResult, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "FitError", "GpdParams", "IngestError", "InsufficientData",
    "PipelineConfig", "PipelineResult", "PowerSeries", "StageError", "load_config",
    "run_pipeline", "__version__",
]
