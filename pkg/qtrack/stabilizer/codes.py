"""Stabilizer code catalog and error-state graph construction."""

import csv
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from ..core.errors import CodeDefinitionError, ConfigError, GraphConstructionError
from .pauli import (
    PauliString,
    all_paulis,
    check_commuting,
    commutes,
    generated_group,
    multiply,
    syndrome_bits,
    syndrome_index,
)


@dataclass(frozen=True)
class StabilizerCode:
    """A stabilizer code together with its error and measurement rates."""

    name: str
    n: int
    generators: tuple[PauliString, ...]
    error_channels: tuple[PauliString, ...]
    logicals: tuple[PauliString, ...] = ()  # (X_L, Z_L) when the code encodes a qubit
    gamma: float = 1.0  # per-channel error rate
    kappa: float = 40.0  # measurement strength

    def __post_init__(self) -> None:
        operators = (*self.generators, *self.error_channels, *self.logicals)
        if any(op.n != self.n for op in operators):
            raise CodeDefinitionError(f"{self.name}: every operator must act on {self.n} qubits")
        if len(self.generators) > self.n:
            raise CodeDefinitionError(
                f"{self.name}: {len(self.generators)} generators exceed {self.n} qubits"
            )
        check_commuting(self.generators)
        if any(ch.is_identity for ch in self.error_channels):
            raise CodeDefinitionError(f"{self.name}: the identity cannot be an error channel")
        if self.gamma < 0 or self.kappa < 0:
            raise CodeDefinitionError(f"{self.name}: rates must be non-negative")

    @property
    def total_rate(self) -> float:
        """Total error rate Gamma = (number of channels) x gamma."""
        return len(self.error_channels) * self.gamma

    @property
    def n_syndromes(self) -> int:
        return 1 << len(self.generators)

    @cached_property
    def stabilizer_group(self) -> frozenset[PauliString]:
        """All 2**g products of generators."""
        return frozenset(generated_group(self.generators))

    @cached_property
    def logical_flip_group(self) -> frozenset[PauliString]:
        """The stabilizer group together with its cosets by the logical operators."""
        elements = set(self.stabilizer_group)
        for logical in self.logicals:
            elements |= {multiply(s, logical) for s in elements}
        return frozenset(elements)

    def in_stabilizer(self, pauli: PauliString) -> bool:
        return pauli in self.stabilizer_group

    def syndrome_of(self, pauli: PauliString) -> int:
        return syndrome_index(syndrome_bits(pauli, self.generators))

    def with_rates(
        self, gamma: float | None = None, kappa: float | None = None
    ) -> "StabilizerCode":
        """Copy of this code with new rates."""
        return replace(
            self,
            gamma=self.gamma if gamma is None else gamma,
            kappa=self.kappa if kappa is None else kappa,
        )


def _paulis(*labels: str) -> tuple[PauliString, ...]:
    return tuple(PauliString.from_label(label) for label in labels)


def bitflip_code(gamma: float = 1.0, kappa: float = 40.0) -> StabilizerCode:
    """Three-qubit bit-flip code: generators ZZI, ZIZ; channels X on each qubit."""
    return StabilizerCode(
        name="bitflip3",
        n=3,
        generators=_paulis("ZZI", "ZIZ"),
        error_channels=_paulis("XII", "IXI", "IIX"),
        logicals=_paulis("XXX", "ZZZ"),
        gamma=gamma,
        kappa=kappa,
    )


def five_qubit_code(gamma: float = 1.0, kappa: float = 40.0) -> StabilizerCode:
    """Five-qubit perfect code with its cyclic generators and the Pauli channel."""
    channels = tuple(
        PauliString.single(5, qubit, letter) for qubit in range(1, 6) for letter in "XYZ"
    )
    return StabilizerCode(
        name="five_qubit",
        n=5,
        generators=_paulis("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"),
        error_channels=channels,
        logicals=_paulis("XXXXX", "ZZZZZ"),
        gamma=gamma,
        kappa=kappa,
    )


def toy_code(gamma: float = 1.0, kappa: float = 40.0) -> StabilizerCode:
    """Single qubit, one Z generator and one X channel: the minimal two-state chain."""
    return StabilizerCode(
        name="toy1",
        n=1,
        generators=_paulis("Z"),
        error_channels=_paulis("X"),
        gamma=gamma,
        kappa=kappa,
    )


CODE_CATALOG: dict[str, Callable[..., StabilizerCode]] = {
    "bitflip3": bitflip_code,
    "five_qubit": five_qubit_code,
    "toy1": toy_code,
}


def get_code(code_id: str, gamma: float = 1.0, kappa: float = 40.0) -> StabilizerCode:
    """
    Look up a catalog code.

    Raises:
        ConfigError: for an unknown identifier, listing the catalog
    """
    factory = CODE_CATALOG.get(code_id)
    if factory is None:
        raise ConfigError(
            f"unknown code '{code_id}' (catalog: {', '.join(sorted(CODE_CATALOG))})"
        )
    return factory(gamma=gamma, kappa=kappa)


def code_distance(code: StabilizerCode) -> int:
    """Minimum weight of a non-stabilizer Pauli commuting with every generator."""
    best = code.n + 1
    for pauli in all_paulis(code.n):
        if pauli.is_identity or pauli.weight >= best:
            continue
        if all(commutes(pauli, g) for g in code.generators) and not code.in_stabilizer(pauli):
            best = pauli.weight
    return best


@dataclass
class ErrorGraph:
    """Error-state graph: nodes are Pauli strings, edges are error channels."""

    code: StabilizerCode
    nodes: tuple[PauliString, ...]
    neighbors: np.ndarray  # (dim, channels): node reached from m through channel c
    syndrome_of: np.ndarray  # (dim,)
    class_of: np.ndarray  # (dim,)
    class_representatives: tuple[PauliString, ...]
    index: dict[PauliString, int] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {node: i for i, node in enumerate(self.nodes)}

    @property
    def dim(self) -> int:
        return len(self.nodes)

    @property
    def n_syndromes(self) -> int:
        return self.code.n_syndromes

    @property
    def n_classes(self) -> int:
        return len(self.class_representatives)

    def index_of(self, pauli: PauliString | str) -> int:
        if isinstance(pauli, str):
            pauli = PauliString.from_label(pauli)
        try:
            return self.index[pauli]
        except KeyError:
            raise ValueError(f"{pauli} is not a node of the {self.code.name} graph") from None

    def neighbor_set(self, m: int) -> list[int]:
        """Distinct neighbors of node m, excluding self-loops."""
        return sorted({int(v) for v in self.neighbors[m] if v != m})

    def degrees(self) -> np.ndarray:
        return np.array([len(self.neighbor_set(m)) for m in range(self.dim)])

    def syndrome_members(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.syndrome_of == s)

    def class_members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.class_of == c)

    @cached_property
    def syndrome_indicator(self) -> np.ndarray:
        """(dim, n_syndromes) 0/1 matrix mapping node probabilities to syndromes."""
        indicator = np.zeros((self.dim, self.n_syndromes))
        indicator[np.arange(self.dim), self.syndrome_of] = 1.0
        return indicator

    @cached_property
    def syndrome_leaders(self) -> tuple[PauliString | None, ...]:
        """Minimum-weight node of each syndrome (lowest index on ties)."""
        leaders: list[PauliString | None] = []
        for s in range(self.n_syndromes):
            members = self.syndrome_members(s)
            leaders.append(_leader(self.nodes, members) if len(members) else None)
        return tuple(leaders)

    def syndrome_marginals(self, p: np.ndarray) -> np.ndarray:
        """Sum node probabilities over each syndrome; works on (..., dim) arrays."""
        return p @ self.syndrome_indicator

    @cached_property
    def class_indicator(self) -> np.ndarray:
        """(dim, n_classes) 0/1 matrix mapping node probabilities to logical classes."""
        indicator = np.zeros((self.dim, self.n_classes))
        indicator[np.arange(self.dim), self.class_of] = 1.0
        return indicator

    def class_marginals(self, p: np.ndarray) -> np.ndarray:
        """Sum node probabilities over each logical class; works on (..., dim) arrays."""
        return p @ self.class_indicator

    def stats(self) -> dict[str, int]:
        degrees = self.degrees()
        return {
            "nodes": self.dim,
            "degree_min": int(degrees.min()),
            "degree_max": int(degrees.max()),
            "syndromes": len(np.unique(self.syndrome_of)),
            "classes": self.n_classes,
        }


def _leader(nodes: tuple[PauliString, ...], members: np.ndarray) -> PauliString:
    best = min(members, key=lambda i: (nodes[i].weight, i))
    return nodes[best]


def build_error_graph(code: StabilizerCode) -> ErrorGraph:
    """
    Close the identity under the error channels and index the result.

    Nodes are ordered lexicographically by (x, z), so the identity is node 0.
    Classes are cosets of the stabilizer group restricted to the node set.
    """
    identity = PauliString.identity(code.n)
    seen = {identity}
    queue = deque([identity])
    while queue:
        node = queue.popleft()
        for channel in code.error_channels:
            nxt = multiply(node, channel)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)

    nodes = tuple(sorted(seen, key=lambda p: p.sort_key))
    index = {node: i for i, node in enumerate(nodes)}
    neighbors = np.array(
        [[index[multiply(node, ch)] for ch in code.error_channels] for node in nodes],
        dtype=np.int64,
    ).reshape(len(nodes), len(code.error_channels))
    syndromes = np.array([code.syndrome_of(node) for node in nodes], dtype=np.int64)

    # Coset key: the smallest member of node * S
    stabilizers = sorted(code.stabilizer_group, key=lambda p: p.sort_key)
    class_ids: dict[tuple[int, int], int] = {}
    class_of = np.empty(len(nodes), dtype=np.int64)
    for i, node in enumerate(nodes):
        key = min(multiply(node, s).sort_key for s in stabilizers)
        class_of[i] = class_ids.setdefault(key, len(class_ids))
    representatives = tuple(
        _leader(nodes, np.flatnonzero(class_of == c)) for c in range(len(class_ids))
    )

    return ErrorGraph(
        code=code,
        nodes=nodes,
        neighbors=neighbors,
        syndrome_of=syndromes,
        class_of=class_of,
        class_representatives=representatives,
        index=index,
    )


def lump_graph(graph: ErrorGraph, blocks: np.ndarray) -> ErrorGraph:
    """
    Lump an error graph by a partition of its nodes.

    Each block becomes one node, represented by its minimum-weight member.

    Raises:
        GraphConstructionError: if members of a block have differing
            outgoing block-transition multiplicities
    """
    n_blocks = int(blocks.max()) + 1
    members = [np.flatnonzero(blocks == b) for b in range(n_blocks)]
    lumped_neighbors = np.empty((n_blocks, graph.neighbors.shape[1]), dtype=np.int64)
    for b, block in enumerate(members):
        counts = [
            np.bincount(blocks[graph.neighbors[m]], minlength=n_blocks) for m in block
        ]
        if any(not np.array_equal(counts[0], c) for c in counts[1:]):
            raise GraphConstructionError(
                f"{graph.code.name}: block {b} has inconsistent outgoing transitions"
            )
        lumped_neighbors[b] = blocks[graph.neighbors[block[0]]]

    leaders = tuple(_leader(graph.nodes, block) for block in members)
    return ErrorGraph(
        code=graph.code,
        nodes=leaders,
        neighbors=lumped_neighbors,
        syndrome_of=np.array([graph.syndrome_of[block[0]] for block in members]),
        class_of=np.arange(n_blocks),
        class_representatives=leaders,
    )


def syndrome_chain(code: StabilizerCode) -> ErrorGraph:
    """The extended graph lumped by syndrome."""
    graph = build_error_graph(code)
    return lump_graph(graph, graph.syndrome_of)


def class_graph(code: StabilizerCode) -> ErrorGraph:
    """The extended graph lumped by logical class."""
    graph = build_error_graph(code)
    return lump_graph(graph, graph.class_of)


def write_graph_csv(graph: ErrorGraph, path: Path) -> Path:
    """Export the graph as `node_index, node_pauli, syndrome, class, neighbors...` rows."""
    with path.open("w", newline="", encoding="utf-8") as fh:
        for key, value in graph.stats().items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_index", "node_pauli", "syndrome", "class", "neighbor_indices"])
        for m, node in enumerate(graph.nodes):
            writer.writerow(
                [m, node.label, int(graph.syndrome_of[m]), int(graph.class_of[m])]
                + graph.neighbor_set(m)
            )
    return path
