"""Exception hierarchy and CLI exit codes."""

from enum import IntEnum
from typing import Any


class ExitCode(IntEnum):
    """Process exit codes returned by the CLI."""

    OK = 0
    USAGE = 1
    NUMERICAL = 2
    VALIDATION = 3


class QTrackError(Exception):
    """Base class for all qtrack errors."""

    exit_code: ExitCode = ExitCode.USAGE


class ConfigError(QTrackError):
    """Invalid configuration file, field, or catalog identifier."""


class CodeDefinitionError(QTrackError):
    """A stabilizer code violates its structural invariants."""


class GraphConstructionError(QTrackError):
    """An error-state graph cannot be lumped into a well-defined chain."""


class NumericalFailure(QTrackError):
    """A filter or SME step produced an unusable state."""

    exit_code = ExitCode.NUMERICAL

    def __init__(self, message: str, **diagnostics: Any) -> None:
        super().__init__(message)
        self.diagnostics: dict[str, Any] = diagnostics


class ExperimentError(QTrackError):
    """An experiment produced no usable trajectories."""

    exit_code = ExitCode.NUMERICAL
