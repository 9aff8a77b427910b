"""Base validation-suite interface and result types."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable


class CheckStatus(Enum):
    """Outcome of a single acceptance check."""

    PASSED = "passed"
    FAILED = "failed"
    ERROR = "error"


@dataclass
class CheckResult:
    """Result from one acceptance check."""

    name: str
    status: CheckStatus
    measured: float | None = None
    tolerance: float | None = None
    detail: str = ""
    data: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASSED

    @classmethod
    def compare(
        cls,
        name: str,
        measured: float,
        tolerance: float,
        detail: str = "",
        **data: Any,
    ) -> "CheckResult":
        """Pass iff measured <= tolerance."""
        status = CheckStatus.PASSED if measured <= tolerance else CheckStatus.FAILED
        return cls(name, status, measured, tolerance, detail, data)

    @classmethod
    def expect(cls, name: str, condition: bool, detail: str = "", **data: Any) -> "CheckResult":
        """Pass iff condition holds."""
        status = CheckStatus.PASSED if condition else CheckStatus.FAILED
        return cls(name, status, detail=detail, data=data)

    @classmethod
    def error(cls, name: str, message: str) -> "CheckResult":
        """Create an error result for a check that raised."""
        return cls(name, CheckStatus.ERROR, detail=message)


@dataclass
class SuiteResult:
    """All check results for one suite run."""

    suite: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]


Check = Callable[[], CheckResult]


class ValidationSuite(ABC):
    """Base class for acceptance suites."""

    name: str = "unnamed"
    description: str = "No description"

    @abstractmethod
    def checks(self) -> list[tuple[str, Check]]:
        """
        List the suite's checks.

        Returns:
            (check name, zero-argument callable) pairs; each callable runs
            the numerics and returns its CheckResult
        """
        pass
