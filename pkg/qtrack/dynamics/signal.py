"""Measurement records: truth-driven and innovations-driven synthesis."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chain import JumpChain, JumpPath
from .wonham import Normalization, advance, check_simplex


@dataclass
class MeasurementRecord:
    """Per-step increments dY_i of the g measurement currents on a uniform grid."""

    dt: float
    increments: np.ndarray  # (steps, g)
    innovations: np.ndarray | None = None  # driving dW, for synthesized records

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        self.increments = np.atleast_2d(np.asarray(self.increments, dtype=float))
        if self.increments.size and not np.all(np.isfinite(self.increments)):
            raise ValueError("measurement record contains non-finite increments")

    @property
    def steps(self) -> int:
        return self.increments.shape[0] if self.increments.size else 0

    @property
    def channels(self) -> int:
        return self.increments.shape[1]

    @property
    def horizon(self) -> float:
        return self.steps * self.dt

    @classmethod
    def empty(cls, dt: float, channels: int) -> "MeasurementRecord":
        return cls(dt, np.zeros((0, channels)))

    def to_csv(self, path: Path) -> Path:
        """Export `step, dY1, ..., dYg` rows; dt goes in a comment line."""
        header = "step," + ",".join(f"dY{i + 1}" for i in range(self.channels))
        lines = [f"# dt={self.dt:.17g}", header]
        lines += [
            f"{k}," + ",".join(f"{v:.17g}" for v in row)
            for k, row in enumerate(self.increments)
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def from_csv(cls, path: Path) -> "MeasurementRecord":
        lines = path.read_text(encoding="utf-8").splitlines()
        dt = float(lines[0].removeprefix("# dt="))
        channels = len(lines[1].split(",")) - 1
        rows = [[float(v) for v in line.split(",")[1:]] for line in lines[2:] if line]
        increments = np.array(rows) if rows else np.zeros((0, channels))
        return cls(dt, increments.reshape(-1, channels))


def grid_steps(horizon: float, dt: float) -> int:
    """Number of grid steps covering [0, horizon]."""
    return int(round(horizon / dt))


def truth_driven_record(
    path: JumpPath,
    chain: JumpChain,
    dt: float,
    rng: np.random.Generator | None,
    steps: int | None = None,
    start_step: int = 0,
) -> MeasurementRecord:
    """
    dY_i = h_i^{m(t)} dt + sqrt(dt) xi, with m(t) the path state at the
    left endpoint of each step.

    `start_step` lets long records be produced in consecutive chunks.
    Passing rng=None disables the noise.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if steps is None:
        steps = grid_steps(path.horizon, dt) - start_step
    if (start_step + steps) * dt > path.horizon * (1 + 1e-12):
        raise ValueError("record horizon exceeds the jump path horizon")

    states = path.state_at(np.arange(start_step, start_step + steps) * dt)
    increments = chain.obs_levels[:, states].T * dt
    if rng is not None:
        increments = increments + np.sqrt(dt) * rng.standard_normal((steps, chain.n_channels))
    return MeasurementRecord(dt, increments.reshape(steps, chain.n_channels))


def innovations_driven_record(
    p0: np.ndarray,
    chain: JumpChain,
    dt: float,
    steps: int,
    rng: np.random.Generator,
    normalization: Normalization = "clip",
) -> MeasurementRecord:
    """
    Drive the filter with Wiener increments dW and emit dY = dW + h^T p dt.

    The returned record carries the driving increments in `innovations`.
    """
    p = np.asarray(p0, dtype=float)
    check_simplex(p)
    h = chain.obs_levels
    dW = np.sqrt(dt) * rng.standard_normal((steps, chain.n_channels))
    increments = np.empty_like(dW)
    for k in range(steps):
        increments[k] = dW[k] + (h @ p) * dt
        p, _ = advance(p, chain, increments[k], dt, normalization)
    return MeasurementRecord(dt, increments, innovations=dW)


def innovations_driven_ensemble(
    p0: np.ndarray,
    chain: JumpChain,
    dt: float,
    steps: int,
    batch: int,
    rng: np.random.Generator,
    normalization: Normalization = "clip",
) -> np.ndarray:
    """Terminal filter states of `batch` innovations-driven records, stepped together."""
    p = np.tile(np.asarray(p0, dtype=float), (batch, 1))
    check_simplex(p[0])
    h = chain.obs_levels
    for _ in range(steps):
        dY = np.sqrt(dt) * rng.standard_normal((batch, chain.n_channels)) + (p @ h.T) * dt
        p, _ = advance(p, chain, dY, dt, normalization)
    return p


def recover_innovations(
    record: MeasurementRecord,
    chain: JumpChain,
    p0: np.ndarray,
    normalization: Normalization = "clip",
) -> np.ndarray:
    """Replay a record through the filter and return dY - h^T p dt per step."""
    p = np.asarray(p0, dtype=float)
    check_simplex(p)
    h = chain.obs_levels
    innovations = np.empty_like(record.increments)
    for k, dY in enumerate(record.increments):
        innovations[k] = dY - (h @ p) * record.dt
        p, _ = advance(p, chain, dY, record.dt, normalization)
    return innovations
