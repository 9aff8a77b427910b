"""Truth-driven and innovations-driven records share one law."""

import threading

import numpy as np
from scipy import stats

from ..core.rng import TrajectoryStreams, make_generator
from ..core.suite import Check, CheckResult, ValidationSuite
from ..dynamics.chain import sample_jump_path
from ..dynamics.signal import innovations_driven_ensemble, recover_innovations, truth_driven_record
from ..dynamics.wonham import FilterState
from ..metrics import bound_series
from ..montecarlo import ExperimentConfig, build_model, run_batch

SIGNIFICANCE = 0.01
WHITENESS_RECORDS = 20
WHITENESS_BLOCK = 1000  # steps per innovation block


class InnovationsLawSuite(ValidationSuite):
    """
    Compare terminal filter statistics of records synthesized from a true
    error path with records synthesized from the filter's own innovations.
    """

    name = "innovations-law"
    description = "Two-sample KS tests between truth-driven and innovations-driven records"

    def __init__(self, records: int = 500, horizon: float = 1.0, seed: int = 7) -> None:
        self.records = records
        self.horizon = horizon
        self.seed = seed
        self._samples: dict[str, tuple[np.ndarray, np.ndarray]] | None = None
        self._lock = threading.Lock()

    def checks(self) -> list[tuple[str, Check]]:
        return [
            ("terminal-identity", lambda: self._ks("identity")),
            ("terminal-bound", lambda: self._ks("bound")),
            ("innovations-whiteness", self._whiteness),
        ]

    def _config(self) -> ExperimentConfig:
        return ExperimentConfig(
            code="bitflip3", horizon=self.horizon, trajectories=self.records, seed=self.seed
        ).resolve()

    def _terminal_samples(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        with self._lock:
            if self._samples is None:
                self._samples = self._simulate()
        return self._samples

    def _simulate(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        cfg = self._config()
        model = build_model(cfg.code, cfg.gamma, cfg.kappa)
        truth = run_batch(cfg, range(self.records)).terminal

        p0 = FilterState.vertex(model.graph.dim, 0).p
        rng = make_generator(self.seed, self.records, 1)
        synthetic = innovations_driven_ensemble(
            p0, model.chain, cfg.dt, cfg.steps, self.records, rng
        )
        return {
            "identity": (truth[:, 0], synthetic[:, 0]),
            "bound": (
                bound_series(truth, model.graph)[0],
                bound_series(synthetic, model.graph)[0],
            ),
        }

    def _ks(self, statistic: str) -> CheckResult:
        truth, synthetic = self._terminal_samples()[statistic]
        result = stats.ks_2samp(truth, synthetic)
        return CheckResult.expect(
            f"terminal-{statistic}",
            result.pvalue >= SIGNIFICANCE,
            detail=f"KS D={result.statistic:.4f}, p={result.pvalue:.4f}",
            statistic=float(result.statistic),
            pvalue=float(result.pvalue),
        )

    def _whiteness(self) -> CheckResult:
        """Block sums of recovered innovations are independent N(0, block length)."""
        cfg = self._config()
        model = build_model(cfg.code, cfg.gamma, cfg.kappa)
        p0 = FilterState.vertex(model.graph.dim, 0).p
        block = min(WHITENESS_BLOCK, cfg.steps)
        blocks = cfg.steps // block
        samples = []
        for index in range(min(self.records, WHITENESS_RECORDS)):
            streams = TrajectoryStreams.derive(cfg.seed, index)
            path = sample_jump_path(model.chain, 0, cfg.horizon, streams.jumps)
            record = truth_driven_record(path, model.chain, cfg.dt, streams.noise, steps=cfg.steps)
            innovations = recover_innovations(record, model.chain, p0)
            sums = innovations[: blocks * block].reshape(blocks, block, -1)
            samples.append(sums.sum(axis=1).ravel() / np.sqrt(block * cfg.dt))
        result = stats.kstest(np.concatenate(samples), "norm")
        return CheckResult.expect(
            "innovations-whiteness",
            result.pvalue >= SIGNIFICANCE,
            detail=f"KS vs N(0,1): D={result.statistic:.4f}, p={result.pvalue:.4f}",
            pvalue=float(result.pvalue),
        )
