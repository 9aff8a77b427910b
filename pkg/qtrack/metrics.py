"""Information bound, its rate of change, correction policies and scoring."""

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .dynamics.chain import JumpChain
from .dynamics.wonham import FilterState
from .stabilizer.codes import ErrorGraph, StabilizerCode
from .stabilizer.pauli import PauliString, multiply

MetricMode = Literal["per-string", "per-class"]
METRIC_MODES: tuple[MetricMode, ...] = ("per-string", "per-class")


@dataclass
class InfoSnapshot:
    """The bound J and its ingredients at one time."""

    t: float
    p_star: float  # max state (or class) probability
    J: float
    I: np.ndarray  # conditional probability given the syndrome; nan where undefined
    syndrome_probs: np.ndarray
    argmax: int  # state (or class) attaining J; lowest index on ties
    mode: MetricMode = "per-string"

    @property
    def excluded(self) -> int:
        """Number of states left out of the max for lack of syndrome probability."""
        return int(np.count_nonzero(np.isnan(self.I)))


def class_syndromes(graph: ErrorGraph) -> np.ndarray:
    """Syndrome of each logical class."""
    syndromes = np.empty(graph.n_classes, dtype=np.int64)
    syndromes[graph.class_of] = graph.syndrome_of
    return syndromes


def conditional_ratios(
    p: np.ndarray, graph: ErrorGraph, mode: MetricMode = "per-string"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Weights, syndrome probabilities and I = weight / P(syndrome).

    Works on (dim,) or (batch, dim) arrays. Weights are state probabilities
    in per-string mode and class-lumped probabilities in per-class mode.
    Entries whose syndrome has zero probability are nan.
    """
    P = graph.syndrome_marginals(p)
    if mode == "per-string":
        weights, syndromes = p, graph.syndrome_of
    elif mode == "per-class":
        weights, syndromes = graph.class_marginals(p), class_syndromes(graph)
    else:
        raise ValueError(f"unknown metric mode: {mode}")
    denominator = P[..., syndromes]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(denominator > 0, weights / denominator, np.nan)
    return weights, P, ratios


def info_bound(
    state: FilterState, graph: ErrorGraph, mode: MetricMode = "per-string"
) -> InfoSnapshot:
    """
    J_t = max_m p^m / P^{s(m)}: the best recovery probability any future
    time can still reach.

    Syndromes with zero probability are excluded from the max.
    """
    weights, P, ratios = conditional_ratios(state.p, graph, mode)
    argmax = int(np.nanargmax(ratios))
    return InfoSnapshot(
        t=state.t,
        p_star=float(weights.max()),
        J=float(ratios[argmax]),
        I=ratios,
        syndrome_probs=P,
        argmax=argmax,
        mode=mode,
    )


def bound_series(
    p: np.ndarray, graph: ErrorGraph, mode: MetricMode = "per-string"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(J, p_star, argmax) for a (batch, dim) array of filter states."""
    weights, _, ratios = conditional_ratios(p, graph, mode)
    argmax = np.nanargmax(ratios, axis=-1)
    bound = np.take_along_axis(ratios, argmax[..., None], axis=-1)[..., 0]
    return bound, weights.max(axis=-1), argmax


def info_bound_derivative(snapshot: InfoSnapshot, chain: JumpChain, graph: ErrorGraph) -> float:
    """
    dJ/dt = -sum_{n != m*} L_{n m*} (P^n / P^{m*}) (J - I^n) <= 0.

    `chain` and `graph` must index the same states as the snapshot: the
    extended chain for per-string snapshots, the class-lumped chain for
    per-class ones.
    """
    if len(snapshot.I) != chain.dim:
        raise ValueError(
            f"snapshot has {len(snapshot.I)} states but the chain has {chain.dim}"
        )
    m_star = snapshot.argmax
    P = snapshot.syndrome_probs
    syndromes = graph.syndrome_of
    rates_in = chain.intensity_t[m_star].toarray().ravel()  # L_{n m*}
    rates_in[m_star] = 0.0
    ratios = np.nan_to_num(snapshot.I, nan=0.0)
    terms = rates_in * P[syndromes] / P[syndromes[m_star]] * (snapshot.J - ratios)
    return -float(terms.sum())


def info_ratio_rates(p: np.ndarray, chain: JumpChain, graph: ErrorGraph) -> np.ndarray:
    """
    Exact dI^m/dt for every state from the lumped drift:

        dI^m/dt = ((L^T p)_m - I^m sum_{m' in s(m)} (L^T p)_{m'}) / P^{s(m)}

    The noise terms cancel because states sharing a syndrome share their
    observation levels. nan where the syndrome has zero probability.
    """
    _, P, ratios = conditional_ratios(p, graph)
    inflow = chain.intensity_t @ p
    lumped = graph.syndrome_marginals(inflow)
    denominator = P[graph.syndrome_of]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(
            denominator > 0, (inflow - ratios * lumped[graph.syndrome_of]) / denominator, np.nan
        )


def naive_policy(p: FilterState, graph: ErrorGraph) -> PauliString:
    """
    Discrete-QEC decision: correct the most likely syndrome's leader.

    `p` is over syndromes. The leader is the minimum-weight error carrying
    that syndrome (III for the trivial syndrome, IXI for (-1,+1), ...).
    """
    if p.dim != graph.n_syndromes:
        raise ValueError(f"expected {graph.n_syndromes} syndrome probabilities, got {p.dim}")
    leader = graph.syndrome_leaders[p.argmax]
    if leader is None:
        raise ValueError(f"syndrome {p.argmax} has no error state in the graph")
    return leader


def optimal_policy(
    p: FilterState, graph: ErrorGraph, mode: MetricMode = "per-string"
) -> PauliString:
    """Correct the most likely error state, or the most likely class's representative."""
    if mode == "per-string":
        return graph.nodes[p.argmax]
    if mode == "per-class":
        classes = graph.class_marginals(p.p)
        return graph.class_representatives[int(np.argmax(classes))]
    raise ValueError(f"unknown metric mode: {mode}")


def score_recovery(correction: PauliString, truth: PauliString, code: StabilizerCode) -> bool:
    """True iff correction * truth acts as the identity on the code space."""
    return code.in_stabilizer(multiply(correction, truth))


def snapshots_to_csv(snapshots: list[InfoSnapshot], path: Path) -> Path:
    """Export `t, p_star, J, argmax, P0, ...` rows."""
    n_syndromes = len(snapshots[0].syndrome_probs) if snapshots else 0
    lines = ["t,p_star,J,argmax," + ",".join(f"P{s}" for s in range(n_syndromes))]
    for snap in snapshots:
        values = [f"{snap.t:.17g}", f"{snap.p_star:.17g}", f"{snap.J:.17g}", str(snap.argmax)]
        values += [f"{v:.17g}" for v in snap.syndrome_probs]
        lines.append(",".join(values))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
