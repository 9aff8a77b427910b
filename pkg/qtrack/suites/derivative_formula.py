"""Finite differences of J against its closed-form rate of change."""

import threading

import numpy as np

from ..core.suite import Check, CheckResult, ValidationSuite
from ..dynamics.wonham import FilterState, advance
from ..metrics import info_bound, info_bound_derivative
from ..montecarlo import ExperimentConfig, batch_increments, build_model, truth_paths

KAPPA_DT = 1e-4
MIN_SYNDROME_PROBABILITY = 0.5


class DerivativeFormulaSuite(ValidationSuite):
    """
    Along filtered trajectories, (J(t+dt) - J(t))/dt matches the rate
    formula evaluated from the filter state at t.

    Steps where the argmax changes, where clipping fired, or where the
    argmax syndrome is unlikely are skipped.
    """

    name = "derivative-formula"
    description = "Finite-difference dJ/dt matches the closed-form rate"

    def __init__(
        self,
        trajectories: int = 10,
        horizon: float = 0.25,
        kappa: float = 40.0,
        sample_every: int = 50,
        seed: int = 3,
    ) -> None:
        self.config = ExperimentConfig(
            code="bitflip3",
            kappa=kappa,
            dt=KAPPA_DT / kappa,
            horizon=horizon,
            trajectories=trajectories,
            seed=seed,
        )
        self.sample_every = sample_every
        self._pairs: tuple[np.ndarray, np.ndarray] | None = None
        self._lock = threading.Lock()

    def checks(self) -> list[tuple[str, Check]]:
        return [("finite-difference", self._compare), ("sign", self._sign)]

    def _samples(self) -> tuple[np.ndarray, np.ndarray]:
        with self._lock:
            if self._pairs is None:
                self._pairs = self._simulate()
        return self._pairs

    def _simulate(self) -> tuple[np.ndarray, np.ndarray]:
        """(finite differences, formula values) at the usable sample steps."""
        cfg = self.config.resolve()
        model = build_model(cfg.code, cfg.gamma, cfg.kappa)
        graph, chain = model.graph, model.chain
        indices = list(range(cfg.trajectories))
        paths, streams = truth_paths(cfg, indices)

        p = np.zeros((len(indices), graph.dim))
        p[:, graph.index_of(cfg.initial_state)] = 1.0
        measured, predicted = [], []
        for k, dY in enumerate(batch_increments(cfg, paths, streams)):
            sample = k % self.sample_every == 0
            before = [info_bound(FilterState(row), graph) for row in p] if sample else []
            p, clipped = advance(p, chain, dY, cfg.dt, cfg.normalization)
            if not sample or clipped:
                continue
            for snap, row in zip(before, p):
                after = info_bound(FilterState(row), graph)
                m_star = snap.argmax
                if after.argmax != m_star:
                    continue
                if snap.syndrome_probs[graph.syndrome_of[m_star]] < MIN_SYNDROME_PROBABILITY:
                    continue
                measured.append((after.J - snap.J) / cfg.dt)
                predicted.append(info_bound_derivative(snap, chain, graph))
        return np.array(measured), np.array(predicted)

    def _compare(self) -> CheckResult:
        measured, predicted = self._samples()
        cfg = self.config.resolve()
        absolute = 10 * cfg.dt * cfg.total_rate
        allowed = np.maximum(absolute, 0.05 * np.abs(predicted))
        excess = np.abs(measured - predicted) - allowed
        return CheckResult.compare(
            "finite-difference",
            float(excess.max()) if len(excess) else np.inf,
            0.0,
            detail=f"{len(measured)} samples, tolerance max({absolute:.2e}, 5% relative)",
            samples=len(measured),
        )

    def _sign(self) -> CheckResult:
        _, predicted = self._samples()
        return CheckResult.compare(
            "sign",
            float(predicted.max()) if len(predicted) else np.inf,
            1e-12,
            detail="largest closed-form dJ/dt (must be <= 0)",
        )
