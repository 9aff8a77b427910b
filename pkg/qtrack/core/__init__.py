"""Core framework components."""

from .config import Settings, get_settings
from .errors import (
    CodeDefinitionError,
    ConfigError,
    ExitCode,
    ExperimentError,
    GraphConstructionError,
    NumericalFailure,
    QTrackError,
)
from .orchestrator import Orchestrator
from .suite import CheckResult, SuiteResult, ValidationSuite

__all__ = [
    "Settings",
    "get_settings",
    "CodeDefinitionError",
    "ConfigError",
    "ExitCode",
    "ExperimentError",
    "GraphConstructionError",
    "NumericalFailure",
    "QTrackError",
    "Orchestrator",
    "CheckResult",
    "SuiteResult",
    "ValidationSuite",
]
