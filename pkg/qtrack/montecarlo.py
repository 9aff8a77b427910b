"""Reproducible trajectory and ensemble runner.

One trajectory is: sample the true error path, synthesize the measurement record
from it, run the Wonham filter, compute the bound along the way and score
both correction policies at the horizon.
"""

import asyncio
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .core.config import get_settings
from .core.errors import ExperimentError, NumericalFailure
from .core.log import log, warn
from .core.rng import TrajectoryStreams
from .dynamics.chain import JumpChain, JumpPath, chain_from_graph, sample_jump_path
from .dynamics.signal import MeasurementRecord, grid_steps, truth_driven_record
from .dynamics.wonham import FilterState, Normalization, Trajectory, advance, run_filter
from .metrics import (
    InfoSnapshot,
    MetricMode,
    bound_series,
    info_bound,
    naive_policy,
    optimal_policy,
    score_recovery,
)
from .stabilizer.codes import (
    CODE_CATALOG,
    ErrorGraph,
    StabilizerCode,
    build_error_graph,
    class_graph,
    get_code,
)
from .stabilizer.pauli import PauliString

KAPPA_DT_LIMIT = 1e-3
GAMMA_DT_LIMIT = 1e-4
DEFAULT_KAPPA = 40.0  # in units of gamma
POLICIES = ("naive", "optimal")
IN_FLIGHT_PER_WORKER = 2


@lru_cache(maxsize=None)
def graph_nodes(code_id: str) -> frozenset[PauliString]:
    """Node set of a catalog code's error graph; rates do not change it."""
    return frozenset(build_error_graph(get_code(code_id)).nodes)


class ExperimentConfig(BaseModel):
    """
    One simulation experiment.

    Rates are in units of the time unit; with the default gamma = 1 all
    times are in units of 1/gamma. `kappa_over_total_rate` is the kappa/Gamma
    shorthand. With time_unit = "total_rate", horizon and dt are read in
    units of 1/Gamma.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    code: str = "bitflip3"
    gamma: float = Field(1.0, ge=0)
    kappa: float | None = Field(None, ge=0)
    kappa_over_total_rate: float | None = Field(None, ge=0)
    time_unit: Literal["absolute", "total_rate"] = "absolute"
    horizon: float = Field(1.0, gt=0)
    dt: float | None = Field(None, gt=0)
    trajectories: int = Field(50, ge=1)
    seed: int = Field(0, ge=0)
    emit_stride: int | None = Field(None, ge=1)
    metric_mode: MetricMode | None = None
    normalization: Normalization = "clip"
    initial_state: str | None = None
    sweep: list[float] = Field(default_factory=list)  # kappa/Gamma points for ensembles

    @field_validator("code")
    @classmethod
    def _known_code(cls, value: str) -> str:
        if value not in CODE_CATALOG:
            known = ", ".join(sorted(CODE_CATALOG))
            raise ValueError(f"unknown code '{value}' (catalog: {known})")
        return value

    @field_validator("sweep")
    @classmethod
    def _positive_sweep(cls, value: list[float]) -> list[float]:
        if any(v < 0 for v in value):
            raise ValueError("kappa/Gamma sweep values must be non-negative")
        return value

    @field_validator("initial_state")
    @classmethod
    def _pauli_label(cls, value: str | None) -> str | None:
        return None if value is None else PauliString.from_label(value).label

    @model_validator(mode="after")
    def _check_initial_state(self) -> "ExperimentConfig":
        if self.initial_state is None:
            return self
        n = get_code(self.code).n
        if len(self.initial_state) != n:
            raise ValueError(
                f"initial_state {self.initial_state} acts on {len(self.initial_state)} "
                f"qubits, {self.code} has {n}"
            )
        if PauliString.from_label(self.initial_state) not in graph_nodes(self.code):
            raise ValueError(
                f"initial_state {self.initial_state} is not a node of the {self.code} error graph"
            )
        return self

    @model_validator(mode="after")
    def _check_rates(self) -> "ExperimentConfig":
        if self.kappa is not None and self.kappa_over_total_rate is not None:
            implied = self.kappa_over_total_rate * self.total_rate
            if not math.isclose(self.kappa, implied, rel_tol=1e-9, abs_tol=1e-12):
                raise ValueError("kappa and kappa_over_total_rate disagree; give only one")
        if self.time_unit == "total_rate" and self.total_rate <= 0:
            raise ValueError("time_unit 'total_rate' needs a positive total error rate")
        if self.dt is not None and self.resolved_kappa * self._time_scale * self.dt > (
            KAPPA_DT_LIMIT * (1 + 1e-9)
        ):
            raise ValueError(f"dt too coarse: kappa*dt must be <= {KAPPA_DT_LIMIT}")
        return self

    @property
    def total_rate(self) -> float:
        """Gamma = (number of error channels) x gamma."""
        return len(get_code(self.code).error_channels) * self.gamma

    @property
    def resolved_kappa(self) -> float:
        if self.kappa is not None:
            return self.kappa
        if self.kappa_over_total_rate is not None:
            return self.kappa_over_total_rate * self.total_rate
        return DEFAULT_KAPPA * self.gamma if self.gamma > 0 else DEFAULT_KAPPA

    @property
    def _time_scale(self) -> float:
        return 1.0 / self.total_rate if self.time_unit == "total_rate" else 1.0

    def resolve(self) -> "ExperimentConfig":
        """
        Fill every defaultable field; the result is what manifests record.

        dt is always snapped to horizon / ceil(horizon / dt), so the grid ends
        exactly at the horizon. Resolving a resolved config changes nothing.
        """
        kappa = self.resolved_kappa
        horizon = self.horizon * self._time_scale
        if self.dt is not None:
            dt = self.dt * self._time_scale
        else:
            limits = [KAPPA_DT_LIMIT / kappa if kappa > 0 else math.inf]
            limits.append(GAMMA_DT_LIMIT / self.gamma if self.gamma > 0 else math.inf)
            dt = min(min(limits), horizon / 1000)
        steps = math.ceil(horizon / dt * (1 - 1e-12))
        code = get_code(self.code)
        return self.model_copy(
            update={
                "kappa": kappa,
                "kappa_over_total_rate": (
                    kappa / self.total_rate if self.total_rate > 0 else None
                ),
                "time_unit": "absolute",
                "horizon": horizon,
                "dt": horizon / steps,
                "emit_stride": self.emit_stride or get_settings().emit_stride,
                "metric_mode": self.metric_mode
                or ("per-class" if self.code == "five_qubit" else "per-string"),
                "initial_state": self.initial_state or PauliString.identity(code.n).label,
            }
        )

    def at_ratio(self, ratio: float) -> "ExperimentConfig":
        """This experiment at another kappa/Gamma point; a too coarse dt is re-derived."""
        data = self.model_dump() | {"kappa": None, "kappa_over_total_rate": ratio}
        kappa = ratio * self.total_rate
        if self.dt is not None and kappa * self._time_scale * self.dt > KAPPA_DT_LIMIT:
            data["dt"] = None
        return type(self).model_validate(data)

    @property
    def steps(self) -> int:
        return grid_steps(self.horizon, self.dt)


@dataclass(frozen=True, eq=False)
class SimulationModel:
    """Everything a trajectory worker shares read-only."""

    code: StabilizerCode
    graph: ErrorGraph
    chain: JumpChain


@lru_cache(maxsize=16)
def build_model(code_id: str, gamma: float, kappa: float) -> SimulationModel:
    code = get_code(code_id, gamma=gamma, kappa=kappa)
    graph = build_error_graph(code)
    return SimulationModel(code=code, graph=graph, chain=chain_from_graph(graph, code))


@lru_cache(maxsize=16)
def build_class_model(code_id: str, gamma: float, kappa: float) -> SimulationModel:
    """The model lumped by logical class, for per-class bound rates."""
    code = get_code(code_id, gamma=gamma, kappa=kappa)
    graph = class_graph(code)
    return SimulationModel(code=code, graph=graph, chain=chain_from_graph(graph, code))


def model_for(config: ExperimentConfig) -> SimulationModel:
    cfg = config.resolve()
    return build_model(cfg.code, cfg.gamma, cfg.kappa)


@dataclass
class TrajectoryResult:
    """Outputs of one trajectory; deterministic in (seed, index)."""

    index: int
    failed: bool = False
    diagnostics: dict[str, Any] = field(default_factory=dict)
    trajectory: Trajectory | None = None
    snapshots: list[InfoSnapshot] = field(default_factory=list)
    path: JumpPath | None = None
    record: MeasurementRecord | None = None
    truth: PauliString | None = None
    corrections: dict[str, PauliString] = field(default_factory=dict)
    success: dict[str, bool] = field(default_factory=dict)
    clip_events: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def bound(self) -> np.ndarray:
        return np.array([s.J for s in self.snapshots])

    @property
    def p_star(self) -> np.ndarray:
        return np.array([s.p_star for s in self.snapshots])


def run_trajectory(
    config: ExperimentConfig, index: int, keep_record: bool = False
) -> TrajectoryResult:
    """
    Simulate trajectory `index` of an experiment.

    A numerical failure of the filter does not raise; the result is flagged
    and carries the diagnostics.
    """
    cfg = config.resolve()
    model = build_model(cfg.code, cfg.gamma, cfg.kappa)
    graph, chain = model.graph, model.chain
    streams = TrajectoryStreams.derive(cfg.seed, index)

    initial = graph.index_of(cfg.initial_state)
    path = sample_jump_path(chain, initial, cfg.horizon, streams.jumps)
    record = truth_driven_record(path, chain, cfg.dt, streams.noise, steps=cfg.steps)

    p0 = FilterState.vertex(graph.dim, initial).p
    try:
        trajectory = run_filter(chain, p0, record, cfg.emit_stride, cfg.normalization)
    except NumericalFailure as e:
        warn("montecarlo", f"trajectory {index} failed: {e}")
        return TrajectoryResult(index=index, failed=True, diagnostics=e.diagnostics, path=path)

    snapshots = [
        info_bound(trajectory.state(k), graph, cfg.metric_mode) for k in range(len(trajectory))
    ]
    excluded = sum(s.excluded for s in snapshots)
    if trajectory.clip_events or excluded:
        log(
            "montecarlo",
            f"trajectory {index}: {trajectory.clip_events} clipped entries, "
            f"{excluded} states excluded from the bound",
        )

    final = trajectory.final
    truth = graph.nodes[path.terminal_state]
    corrections = {
        "naive": naive_policy(FilterState(graph.syndrome_marginals(final.p)), graph),
        "optimal": optimal_policy(final, graph, cfg.metric_mode),
    }
    return TrajectoryResult(
        index=index,
        trajectory=trajectory,
        snapshots=snapshots,
        path=path,
        record=record if keep_record else None,
        truth=truth,
        corrections=corrections,
        success={k: score_recovery(c, truth, model.code) for k, c in corrections.items()},
        clip_events=trajectory.clip_events,
    )


class RunningStats:
    """Streaming mean and variance (Welford) over same-shape arrays."""

    def __init__(self) -> None:
        self.count = 0
        self.mean: np.ndarray | None = None
        self._m2: np.ndarray | None = None

    def add(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        self.count += 1
        if self.mean is None:
            self.mean = values.copy()
            self._m2 = np.zeros_like(values)
            return
        delta = values - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (values - self.mean)

    @property
    def standard_error(self) -> np.ndarray:
        if self.mean is None:
            return np.array([])
        if self.count < 2:
            return np.zeros_like(self.mean)
        return np.sqrt(self._m2 / (self.count - 1) / self.count)


@dataclass
class EnsembleSummary:
    """Ensemble averages of J and p* on the shared time grid."""

    times: np.ndarray
    mean_bound: np.ndarray
    se_bound: np.ndarray
    mean_p_star: np.ndarray
    se_p_star: np.ndarray
    success_rates: dict[str, float]
    completed: int
    failed: int
    clip_events: int
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def trajectories(self) -> int:
        return self.completed + self.failed

    def bound_at(self, t: float) -> tuple[float, float]:
        """Mean and standard error of J at the grid time nearest t."""
        k = int(np.argmin(np.abs(self.times - t)))
        return float(self.mean_bound[k]), float(self.se_bound[k])

    def max_bound_increase(self) -> float:
        """Largest step-to-step increase of the mean bound curve."""
        if len(self.mean_bound) < 2:
            return 0.0
        return float(np.max(np.diff(self.mean_bound)))

    def to_csv(self, path: Path) -> Path:
        """Export `t, mean_J, se_J, mean_pstar, se_pstar` rows."""
        lines = ["t,mean_J,se_J,mean_pstar,se_pstar"]
        columns = (self.times, self.mean_bound, self.se_bound, self.mean_p_star, self.se_p_star)
        for row in zip(*columns):
            lines.append(",".join(f"{v:.17g}" for v in row))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


@dataclass
class TrajectorySummary:
    """The per-trajectory series an ensemble folds; what workers send back."""

    index: int
    failed: bool = False
    times: np.ndarray | None = None
    bound: np.ndarray | None = None
    p_star: np.ndarray | None = None
    success: dict[str, bool] = field(default_factory=dict)
    clip_events: int = 0

    @classmethod
    def from_result(cls, result: TrajectoryResult) -> "TrajectorySummary":
        if result.failed:
            return cls(index=result.index, failed=True)
        return cls(
            index=result.index,
            times=result.times,
            bound=result.bound,
            p_star=result.p_star,
            success=dict(result.success),
            clip_events=result.clip_events,
        )


def summarize_trajectory(config: ExperimentConfig, index: int) -> TrajectorySummary:
    """Run trajectory `index` and keep only the series an ensemble needs."""
    return TrajectorySummary.from_result(run_trajectory(config, index))


class _EnsembleAccumulator:
    def __init__(self) -> None:
        self.bound = RunningStats()
        self.p_star = RunningStats()
        self.successes = {policy: 0 for policy in POLICIES}
        self.times: np.ndarray | None = None
        self.failed = 0
        self.clip_events = 0

    def add(self, result: TrajectorySummary) -> None:
        if result.failed:
            self.failed += 1
            return
        if self.times is None:
            self.times = result.times
        self.bound.add(result.bound)
        self.p_star.add(result.p_star)
        self.clip_events += result.clip_events
        for policy in POLICIES:
            self.successes[policy] += int(result.success[policy])

    def summary(self, config: ExperimentConfig) -> EnsembleSummary:
        completed = self.bound.count
        if completed == 0:
            raise ExperimentError(f"all {self.failed} trajectories failed")
        return EnsembleSummary(
            times=self.times,
            mean_bound=self.bound.mean,
            se_bound=self.bound.standard_error,
            mean_p_star=self.p_star.mean,
            se_p_star=self.p_star.standard_error,
            success_rates={p: n / completed for p, n in self.successes.items()},
            completed=completed,
            failed=self.failed,
            clip_events=self.clip_events,
            config=config.model_dump(mode="json"),
        )


async def run_ensemble_async(config: ExperimentConfig, workers: int = 1) -> EnsembleSummary:
    """
    Run every trajectory of an experiment and fold the results.

    Trajectories run in a process pool when workers > 1. Results are folded
    strictly in index order, so the summary does not depend on scheduling.

    Raises:
        ExperimentError: if every trajectory failed
    """
    cfg = config.resolve()
    accumulator = _EnsembleAccumulator()
    log("montecarlo", f"{cfg.code}: {cfg.trajectories} trajectories, {cfg.steps} steps each")

    if workers <= 1:
        for index in range(cfg.trajectories):
            accumulator.add(summarize_trajectory(cfg, index))
    else:
        loop = asyncio.get_running_loop()
        window = IN_FLIGHT_PER_WORKER * workers
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending: deque[asyncio.Future[TrajectorySummary]] = deque()
            for index in range(cfg.trajectories):
                pending.append(loop.run_in_executor(pool, summarize_trajectory, cfg, index))
                if len(pending) >= window:
                    accumulator.add(await pending.popleft())
            while pending:
                accumulator.add(await pending.popleft())

    summary = accumulator.summary(cfg)
    log(
        "montecarlo",
        f"{cfg.code} kappa/Gamma={cfg.kappa_over_total_rate}: "
        f"{summary.completed} completed, {summary.failed} failed",
    )
    return summary


def run_ensemble(config: ExperimentConfig, workers: int = 1) -> EnsembleSummary:
    """Synchronous entry point for run_ensemble_async."""
    return asyncio.run(run_ensemble_async(config, workers))


@dataclass
class BatchResult:
    """Vectorized statistics over a batch of trajectories."""

    indices: np.ndarray
    times: np.ndarray  # emitted grid
    bound: np.ndarray  # (samples, batch)
    p_star: np.ndarray  # (samples, batch)
    max_bound_increase: np.ndarray  # (batch,), over every grid step
    dominance_violations: np.ndarray  # (batch,)
    terminal: np.ndarray  # (batch, dim)
    truth_terminal: np.ndarray  # (batch,)
    success: dict[str, np.ndarray]
    clip_events: int = 0


def truth_paths(
    config: ExperimentConfig, indices: list[int]
) -> tuple[list[JumpPath], list[TrajectoryStreams]]:
    """True error paths of the given trajectories, with their substreams."""
    cfg = config.resolve()
    model = build_model(cfg.code, cfg.gamma, cfg.kappa)
    initial = model.graph.index_of(cfg.initial_state)
    streams = [TrajectoryStreams.derive(cfg.seed, i) for i in indices]
    paths = [sample_jump_path(model.chain, initial, cfg.horizon, s.jumps) for s in streams]
    return paths, streams


def batch_increments(
    config: ExperimentConfig,
    paths: list[JumpPath],
    streams: list[TrajectoryStreams],
    chunk_steps: int = 1024,
) -> Iterator[np.ndarray]:
    """
    Yield the (batch, g) record increments of every grid step in order.

    Each trajectory's record matches what run_trajectory synthesizes for
    it. Records are produced chunk by chunk to bound memory.
    """
    cfg = config.resolve()
    chain = build_model(cfg.code, cfg.gamma, cfg.kappa).chain
    for start in range(0, cfg.steps, chunk_steps):
        size = min(chunk_steps, cfg.steps - start)
        increments = np.stack(
            [
                truth_driven_record(
                    path, chain, cfg.dt, s.noise, steps=size, start_step=start
                ).increments
                for path, s in zip(paths, streams)
            ],
            axis=1,
        )
        yield from increments


def run_batch(
    config: ExperimentConfig,
    indices: range | list[int],
    chunk_steps: int = 1024,
) -> BatchResult:
    """
    Step a batch of trajectories together, for ensemble statistics.

    Truth paths and noise come from the same per-trajectory substreams as
    run_trajectory.

    Raises:
        NumericalFailure: if any trajectory of the batch collapses
    """
    cfg = config.resolve()
    model = build_model(cfg.code, cfg.gamma, cfg.kappa)
    graph, chain = model.graph, model.chain
    indices = list(indices)
    paths, streams = truth_paths(cfg, indices)

    batch = len(indices)
    p = np.zeros((batch, graph.dim))
    p[:, graph.index_of(cfg.initial_state)] = 1.0
    bound, p_star, _ = bound_series(p, graph, cfg.metric_mode)
    times, bounds, stars = [0.0], [bound], [p_star]
    max_increase = np.full(batch, -np.inf)
    violations = np.zeros(batch, dtype=np.int64)
    clip_events = 0

    increments = batch_increments(cfg, paths, streams, chunk_steps)
    for k, dY in enumerate(increments, start=1):
        p, clipped = advance(p, chain, dY, cfg.dt, cfg.normalization)
        clip_events += clipped
        new_bound, p_star, _ = bound_series(p, graph, cfg.metric_mode)
        max_increase = np.maximum(max_increase, new_bound - bound)
        violations += p_star > new_bound + 1e-12
        bound = new_bound
        if k % cfg.emit_stride == 0 or k == cfg.steps:
            times.append(k * cfg.dt)
            bounds.append(bound)
            stars.append(p_star)

    truth_terminal = np.array([path.terminal_state for path in paths])
    success = {policy: np.zeros(batch, dtype=bool) for policy in POLICIES}
    for b in range(batch):
        final = FilterState(p[b])
        truth = graph.nodes[truth_terminal[b]]
        naive = naive_policy(FilterState(graph.syndrome_marginals(final.p)), graph)
        optimal = optimal_policy(final, graph, cfg.metric_mode)
        success["naive"][b] = score_recovery(naive, truth, model.code)
        success["optimal"][b] = score_recovery(optimal, truth, model.code)

    return BatchResult(
        indices=np.array(indices),
        times=np.array(times),
        bound=np.array(bounds),
        p_star=np.array(stars),
        max_bound_increase=np.maximum(max_increase, 0.0),
        dominance_violations=violations,
        terminal=p,
        truth_terminal=truth_terminal,
        success=success,
        clip_events=clip_events,
    )

