"""Wonham filter: conditional state probabilities of a jump chain in white noise."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np

from ..core.errors import NumericalFailure
from .chain import JumpChain

if TYPE_CHECKING:
    from .signal import MeasurementRecord

Normalization = Literal["clip", "renormalize"]

SIMPLEX_TOLERANCE = 1e-12


@dataclass
class FilterState:
    """Probability vector over chain states at time t."""

    p: np.ndarray
    t: float = 0.0

    @classmethod
    def vertex(cls, dim: int, m: int, t: float = 0.0) -> "FilterState":
        p = np.zeros(dim)
        p[m] = 1.0
        return cls(p, t)

    @classmethod
    def uniform(cls, dim: int, t: float = 0.0) -> "FilterState":
        return cls(np.full(dim, 1.0 / dim), t)

    @property
    def dim(self) -> int:
        return len(self.p)

    @property
    def argmax(self) -> int:
        """Most likely state; the lowest index wins ties."""
        return int(np.argmax(self.p))

    def is_valid(self, tolerance: float = SIMPLEX_TOLERANCE) -> bool:
        return bool(np.all(self.p >= 0) and abs(self.p.sum() - 1.0) <= tolerance)


def check_simplex(p: np.ndarray) -> None:
    """Raise ValueError unless p is a probability vector."""
    if np.any(p < 0) or abs(p.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise ValueError("initial distribution must lie on the probability simplex")


def advance(
    p: np.ndarray,
    chain: JumpChain,
    dY: np.ndarray,
    dt: float,
    normalization: Normalization = "clip",
) -> tuple[np.ndarray, int]:
    """
    One Euler-Maruyama step of the normalized filter.

        p <- p + L^T p dt + sum_i (H_i - h_i^T p) p (dY_i - h_i^T p dt)

    Works on a single state (dim,) with dY (g,) or a batch (B, dim) with
    dY (B, g). "clip" zeroes negative entries before renormalizing;
    "renormalize" only divides by the total.

    Returns:
        The normalized state and the number of clipped entries.

    Raises:
        NumericalFailure: if nothing survives clipping
    """
    h = chain.obs_levels
    predicted = p @ h.T  # (..., g)
    innovation = dY - predicted * dt
    drift = (chain.intensity_t @ p.T).T
    gain = p * (innovation @ h - np.sum(predicted * innovation, axis=-1, keepdims=True))
    new = p + drift * dt + gain

    clipped = 0
    if normalization == "clip":
        negative = new < 0
        clipped = int(np.count_nonzero(negative))
        if clipped:
            new = np.where(negative, 0.0, new)
    total = np.sum(new, axis=-1, keepdims=True)
    if np.any(total <= 0) or not np.all(np.isfinite(total)):
        raise NumericalFailure(
            "filter state collapsed after normalization",
            dt=dt,
            min_total=float(np.min(total)),
            max_increment=float(np.max(np.abs(dY))),
            clipped=clipped,
        )
    return new / total, clipped


def wonham_step(
    state: FilterState,
    chain: JumpChain,
    dY: np.ndarray,
    dt: float,
    normalization: Normalization = "clip",
) -> FilterState:
    """Advance a filter state by one grid step of the measurement record."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    p, _ = advance(state.p, chain, np.asarray(dY, dtype=float), dt, normalization)
    return FilterState(p, state.t + dt)


@dataclass
class Trajectory:
    """Emitted filter states along a record."""

    times: np.ndarray
    probabilities: np.ndarray  # (samples, dim)
    clip_events: int = 0
    steps: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> FilterState:
        return FilterState(self.probabilities[k], float(self.times[k]))

    @property
    def final(self) -> FilterState:
        return self.state(len(self) - 1)

    def to_csv(self, path: Path, top_k: int = 8) -> Path:
        """
        Export `t, p...` rows.

        Chains with at most `top_k` states are written in full; larger ones
        as (index, probability) pairs of the `top_k` most likely states.
        """
        dim = self.probabilities.shape[1]
        if dim <= top_k:
            header = ["t"] + [f"p{m}" for m in range(dim)]
            rows = [
                [f"{t:.17g}"] + [f"{v:.17g}" for v in p]
                for t, p in zip(self.times, self.probabilities)
            ]
        else:
            header = ["t"] + [f"{kind}{r}" for r in range(top_k) for kind in ("idx", "p")]
            rows = []
            for t, p in zip(self.times, self.probabilities):
                order = np.argsort(-p, kind="stable")[:top_k]
                rows.append([f"{t:.17g}"] + [x for m in order for x in (str(m), f"{p[m]:.17g}")])
        lines = [",".join(header)] + [",".join(row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def run_filter(
    chain: JumpChain,
    p0: np.ndarray,
    record: "MeasurementRecord",
    stride: int = 1,
    normalization: Normalization = "clip",
) -> Trajectory:
    """
    Filter a whole record, emitting every `stride`-th state and the final one.

    Raises:
        NumericalFailure: from any step, with the failing step attached
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    p = np.asarray(p0, dtype=float)
    check_simplex(p)

    times, samples, emitted = [0.0], [p.copy()], [0]
    clip_events = 0
    dt = record.dt
    for k, dY in enumerate(record.increments, start=1):
        try:
            p, clipped = advance(p, chain, dY, dt, normalization)
        except NumericalFailure as e:
            e.diagnostics.update(step=k, t=k * dt)
            raise
        clip_events += clipped
        if k % stride == 0 or k == record.steps:
            times.append(k * dt)
            samples.append(p.copy())
            emitted.append(k)

    return Trajectory(
        times=np.array(times),
        probabilities=np.array(samples),
        clip_events=clip_events,
        steps=emitted,
    )
