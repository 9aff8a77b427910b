"""Tests for the code catalog and error graphs."""

import numpy as np
import pytest
from qtrack.core.errors import CodeDefinitionError, ConfigError, GraphConstructionError
from qtrack.core.rng import make_generator
from qtrack.stabilizer.codes import (
    StabilizerCode,
    build_error_graph,
    class_graph,
    code_distance,
    get_code,
    lump_graph,
    syndrome_chain,
    write_graph_csv,
)
from qtrack.stabilizer.pauli import PauliString


class TestCatalog:
    """Test catalog lookup and code validation."""

    def test_unknown_code_lists_catalog(self):
        """Test that an unknown id names the known ones."""
        with pytest.raises(ConfigError, match="bitflip3"):
            get_code("steane")

    def test_rates(self):
        """Test rate plumbing and the total rate."""
        code = get_code("five_qubit", gamma=0.5, kappa=10.0)
        assert code.total_rate == pytest.approx(7.5)
        assert code.kappa == 10.0
        assert code.with_rates(kappa=3.0).kappa == 3.0

    def test_anticommuting_generators_rejected(self):
        """Test that a code with anticommuting generators cannot be built."""
        with pytest.raises(CodeDefinitionError):
            StabilizerCode(
                name="bad",
                n=1,
                generators=(PauliString.from_label("X"), PauliString.from_label("Z")),
                error_channels=(PauliString.from_label("X"),),
            )

    def test_identity_channel_rejected(self):
        """Test that the identity is not an error channel."""
        with pytest.raises(CodeDefinitionError):
            StabilizerCode(
                name="bad",
                n=1,
                generators=(PauliString.from_label("Z"),),
                error_channels=(PauliString.from_label("I"),),
            )

    def test_distances(self):
        """Test code distances (the bit-flip code misses phase flips)."""
        assert code_distance(get_code("five_qubit")) == 3
        assert code_distance(get_code("bitflip3")) == 1

    def test_stabilizer_membership(self):
        """Test stabilizer group membership."""
        code = get_code("five_qubit")
        assert code.in_stabilizer(PauliString.from_label("XZZXI"))
        assert not code.in_stabilizer(PauliString.from_label("XXXXX"))


class TestErrorGraph:
    """Test error graph construction."""

    @pytest.mark.parametrize(
        "code_id, nodes, degree, syndromes, classes",
        [
            ("toy1", 2, 1, 2, 2),
            ("bitflip3", 8, 3, 4, 8),
            ("five_qubit", 1024, 15, 16, 64),
        ],
    )
    def test_stats(self, code_id, nodes, degree, syndromes, classes):
        """Test structural counts of the catalog graphs."""
        stats = build_error_graph(get_code(code_id)).stats()
        assert stats == {
            "nodes": nodes,
            "degree_min": degree,
            "degree_max": degree,
            "syndromes": syndromes,
            "classes": classes,
        }

    def test_identity_is_node_zero(self):
        """Test the node ordering."""
        graph = build_error_graph(get_code("five_qubit"))
        assert graph.nodes[0].is_identity
        assert graph.syndrome_of[0] == 0

    def test_bitflip_syndromes(self):
        """Test the syndrome index of each single flip."""
        graph = build_error_graph(get_code("bitflip3"))
        assert graph.syndrome_of[graph.index_of("XII")] == 3
        assert graph.syndrome_of[graph.index_of("IXI")] == 1
        assert graph.syndrome_of[graph.index_of("IIX")] == 2

    def test_syndrome_leaders(self):
        """Test the minimum-weight decision per syndrome."""
        graph = build_error_graph(get_code("bitflip3"))
        assert [p.label for p in graph.syndrome_leaders] == ["III", "IXI", "IIX", "XII"]

    def test_five_qubit_partitions(self):
        """Test syndrome and class sizes of the five-qubit graph."""
        graph = build_error_graph(get_code("five_qubit"))
        assert np.all(np.bincount(graph.syndrome_of) == 64)
        assert np.all(np.bincount(graph.class_of) == 16)

    def test_class_members_share_syndrome(self):
        """Test that logical classes refine the syndrome partition."""
        graph = build_error_graph(get_code("five_qubit"))
        for c in range(graph.n_classes):
            assert len(set(graph.syndrome_of[graph.class_members(c)])) == 1

    def test_unknown_node(self):
        """Test that unreachable strings are not nodes."""
        graph = build_error_graph(get_code("bitflip3"))
        with pytest.raises(ValueError):
            graph.index_of("ZII")

    def test_marginals(self):
        """Test syndrome and class marginals of a distribution."""
        graph = build_error_graph(get_code("bitflip3"))
        p = np.full(graph.dim, 1 / graph.dim)
        assert np.allclose(graph.syndrome_marginals(p), 0.25)
        assert np.allclose(graph.class_marginals(p), p)

    def test_class_marginals_batch(self):
        """Test five-qubit class marginals of a batch against a per-class sum."""
        graph = build_error_graph(get_code("five_qubit"))
        p = make_generator(8).dirichlet(np.ones(graph.dim), size=3)
        marginals = graph.class_marginals(p)
        for c in range(graph.n_classes):
            assert np.allclose(marginals[:, c], p[:, graph.class_members(c)].sum(axis=1))
        assert graph.class_indicator is graph.class_indicator


class TestLumping:
    """Test lumping by syndrome and by class."""

    def test_syndrome_chain(self):
        """Test the bit-flip syndrome chain."""
        lumped = syndrome_chain(get_code("bitflip3"))
        assert lumped.dim == 4
        assert lumped.stats()["degree_max"] == 3
        assert list(lumped.syndrome_of) == [0, 1, 2, 3]

    def test_class_graph(self):
        """Test the five-qubit class-lumped graph."""
        lumped = class_graph(get_code("five_qubit"))
        assert lumped.dim == 64
        assert lumped.n_syndromes == 16

    def test_inconsistent_partition(self):
        """Test that a non-lumpable partition is rejected."""
        graph = build_error_graph(get_code("bitflip3"))
        blocks = np.arange(graph.dim)
        blocks[graph.index_of("XII")] = blocks[graph.index_of("III")]
        _, blocks = np.unique(blocks, return_inverse=True)
        with pytest.raises(GraphConstructionError):
            lump_graph(graph, blocks)


class TestGraphExport:
    """Test the edge-list CSV."""

    def test_bitflip_csv(self, tmp_path):
        """Test the stats block and the first row."""
        path = write_graph_csv(build_error_graph(get_code("bitflip3")), tmp_path / "g.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "# nodes=8"
        assert "# syndromes=4" in lines
        header = lines.index("node_index,node_pauli,syndrome,class,neighbor_indices")
        assert lines[header + 1] == "0,III,0,0,1,2,4"
        assert len(lines) == header + 1 + 8
