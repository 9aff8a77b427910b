"""Orchestrator that runs registered validation suites."""

import asyncio

from .errors import ConfigError
from .log import log, warn
from .suite import Check, CheckResult, SuiteResult, ValidationSuite


class Orchestrator:
    """Routes validation requests to the registered suites."""

    def __init__(self) -> None:
        self.suites: dict[str, ValidationSuite] = {}

    def register(self, suite: ValidationSuite) -> None:
        """Register a suite with the orchestrator."""
        self.suites[suite.name] = suite
        log("orchestrator", f"registered suite: {suite.name}")

    async def run(self, name: str) -> SuiteResult:
        """
        Run every check of one suite.

        Checks are independent and run concurrently in the default executor.

        Args:
            name: The suite identifier, e.g. "graph-structure"

        Returns:
            SuiteResult with one CheckResult per check, in declaration order

        Raises:
            ConfigError: if no suite with that name is registered
        """
        suite = self.suites.get(name)
        if suite is None:
            known = ", ".join(sorted(self.suites))
            raise ConfigError(f"unknown suite '{name}' (known: {known})")

        loop = asyncio.get_running_loop()
        checks = suite.checks()
        results = await asyncio.gather(
            *[loop.run_in_executor(None, self._run_check, label, check) for label, check in checks]
        )
        return SuiteResult(suite=name, checks=list(results))

    def _run_check(self, label: str, check: Check) -> CheckResult:
        try:
            return check()
        except Exception as e:
            warn("orchestrator", f"check {label} raised: {e}")
            return CheckResult.error(label, f"{type(e).__name__}: {e}")

    def list_suites(self) -> list[dict[str, str]]:
        """List all registered suites."""
        return [
            {"name": suite.name, "description": suite.description}
            for suite in self.suites.values()
        ]
