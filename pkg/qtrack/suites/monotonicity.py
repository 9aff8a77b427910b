"""The bound never increases and dominates the state probabilities."""

import threading

import numpy as np

from ..core.suite import Check, CheckResult, ValidationSuite
from ..montecarlo import BatchResult, ExperimentConfig, run_batch

EPSILON = 1e-3


class MonotonicitySuite(ValidationSuite):
    """Per-step increments of J and p* <= J over a batch of trajectories."""

    name = "monotonicity"
    description = "J_t is non-increasing and bounds p*_t along every trajectory"

    def __init__(
        self, trajectories: int = 100, horizon: float = 2.0, kappa: float = 40.0, seed: int = 11
    ) -> None:
        self.config = ExperimentConfig(
            code="bitflip3",
            kappa=kappa,
            horizon=horizon,
            trajectories=trajectories,
            seed=seed,
            emit_stride=1000,
        )
        self._batch: BatchResult | None = None
        self._lock = threading.Lock()

    def checks(self) -> list[tuple[str, Check]]:
        return [("step-increase", self._step_increase), ("dominance", self._dominance)]

    def _simulate(self) -> BatchResult:
        with self._lock:
            if self._batch is None:
                self._batch = run_batch(self.config, range(self.config.trajectories))
        return self._batch

    def _step_increase(self) -> CheckResult:
        batch = self._simulate()
        return CheckResult.compare(
            "step-increase",
            float(batch.max_bound_increase.max()),
            EPSILON,
            detail=f"{len(batch.indices)} trajectories, "
            f"min J at horizon {np.min(batch.bound[-1]):.4f}",
            clip_events=batch.clip_events,
        )

    def _dominance(self) -> CheckResult:
        batch = self._simulate()
        violations = int(batch.dominance_violations.sum())
        return CheckResult.expect(
            "dominance",
            violations == 0,
            detail=f"p* > J in {violations} grid samples",
            violations=violations,
        )
