"""Continuous-time Markov jump processes on error-state graphs."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from ..stabilizer.codes import ErrorGraph, StabilizerCode


@dataclass(frozen=True, eq=False)
class JumpChain:
    """
    A finite-state jump chain observed through per-channel drift levels.

    `intensity[m, n]` is the transition rate m -> n (rows sum to zero);
    `obs_levels[i, m]` is 2*sqrt(kappa) times the outcome of generator i
    in state m. `channel_targets[m, c]` is the state reached from m through
    error channel c, each channel firing at rate gamma.
    """

    intensity: sparse.csr_matrix
    intensity_t: sparse.csr_matrix  # transpose, for the filter drift
    obs_levels: np.ndarray
    channel_targets: np.ndarray
    syndrome_of: np.ndarray
    gamma: float
    kappa: float

    @property
    def dim(self) -> int:
        return self.intensity.shape[0]

    @property
    def n_channels(self) -> int:
        """Number of observation channels (generators)."""
        return self.obs_levels.shape[0]

    @property
    def exit_rates(self) -> np.ndarray:
        return -self.intensity.diagonal()

    def dense_intensity(self) -> np.ndarray:
        return self.intensity.toarray()


def chain_from_graph(graph: ErrorGraph, code: StabilizerCode | None = None) -> JumpChain:
    """
    Build the jump chain of an error graph.

    Off-diagonal rates are gamma times the number of channels joining the two
    states (parallel channels add); the diagonal is minus the exit rate.
    """
    code = code or graph.code
    dim, n_channels = graph.neighbors.shape
    rows = np.repeat(np.arange(dim), n_channels)
    cols = graph.neighbors.ravel()
    keep = rows != cols
    off = sparse.coo_matrix(
        (np.full(keep.sum(), code.gamma), (rows[keep], cols[keep])), shape=(dim, dim)
    ).tocsr()
    intensity = (off - sparse.diags(np.asarray(off.sum(axis=1)).ravel())).tocsr()

    bits = (graph.syndrome_of[None, :] >> np.arange(len(code.generators))[:, None]) & 1
    obs_levels = 2.0 * np.sqrt(code.kappa) * (1.0 - 2.0 * bits)

    return JumpChain(
        intensity=intensity,
        intensity_t=intensity.T.tocsr(),
        obs_levels=obs_levels,
        channel_targets=graph.neighbors.copy(),
        syndrome_of=graph.syndrome_of.copy(),
        gamma=code.gamma,
        kappa=code.kappa,
    )


@dataclass
class JumpPath:
    """A sampled trajectory of the jump chain on [0, horizon]."""

    initial_state: int
    times: np.ndarray  # strictly increasing jump times in (0, horizon]
    channels: np.ndarray  # channel index of each jump
    states: np.ndarray  # state entered at each jump
    horizon: float

    @property
    def n_events(self) -> int:
        return len(self.times)

    @property
    def terminal_state(self) -> int:
        return int(self.states[-1]) if len(self.states) else self.initial_state

    def state_at(self, t: np.ndarray | float) -> np.ndarray:
        """State occupied at time(s) t; a jump at time tau is in effect from tau on."""
        visited = np.concatenate(([self.initial_state], self.states)).astype(np.int64)
        return visited[np.searchsorted(self.times, t, side="right")]

    def to_csv(self, path: Path, channel_labels: list[str] | None = None) -> Path:
        """Export `time, channel, new_state_index` rows."""
        lines = ["time,channel,new_state_index"]
        for t, c, s in zip(self.times, self.channels, self.states):
            label = channel_labels[c] if channel_labels else str(c)
            lines.append(f"{t:.17g},{label},{s}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def sample_jump_path(
    chain: JumpChain, initial: int, horizon: float, rng: np.random.Generator
) -> JumpPath:
    """
    Exact sampling of the chain on [0, horizon].

    Holding times are exponential with the state's exit rate; the next
    transition picks one of the non-trivial channels uniformly, which is
    the same as choosing the next state in proportion to its rate.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not 0 <= initial < chain.dim:
        raise ValueError(f"initial state {initial} out of range")

    times: list[float] = []
    channels: list[int] = []
    states: list[int] = []
    t, m = 0.0, initial
    exit_rates = chain.exit_rates
    while exit_rates[m] > 0:
        t += rng.exponential(1.0 / exit_rates[m])
        if t > horizon:
            break
        allowed = np.flatnonzero(chain.channel_targets[m] != m)
        c = int(allowed[rng.integers(len(allowed))])
        m = int(chain.channel_targets[m, c])
        times.append(t)
        channels.append(c)
        states.append(m)

    return JumpPath(
        initial_state=initial,
        times=np.array(times),
        channels=np.array(channels, dtype=np.int64),
        states=np.array(states, dtype=np.int64),
        horizon=horizon,
    )


def unraveled_probabilities(path: JumpPath, dim: int, steps: int, dt: float) -> np.ndarray:
    """
    Conditional state given direct observation of every jump.

    Returns the (steps + 1, dim) indicator path e_{m(t_k)} on the grid t_k = k dt.
    """
    states = path.state_at(np.arange(steps + 1) * dt)
    probabilities = np.zeros((steps + 1, dim))
    probabilities[np.arange(steps + 1), states] = 1.0
    return probabilities


def transient_distribution(chain: JumpChain, p0: np.ndarray, t: float) -> np.ndarray:
    """exp(intensity^T t) p0 by dense matrix exponential; small chains only."""
    return expm(chain.dense_intensity().T * t) @ p0
