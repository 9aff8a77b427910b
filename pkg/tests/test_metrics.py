"""Tests for the information bound and correction policies."""

import numpy as np
import pytest
from qtrack.core.rng import make_generator
from qtrack.dynamics.chain import chain_from_graph
from qtrack.dynamics.wonham import FilterState
from qtrack.metrics import (
    bound_series,
    conditional_ratios,
    info_bound,
    info_bound_derivative,
    info_ratio_rates,
    naive_policy,
    optimal_policy,
    score_recovery,
    snapshots_to_csv,
)
from qtrack.stabilizer.codes import build_error_graph, class_graph, get_code
from qtrack.stabilizer.pauli import PauliString


@pytest.fixture
def graph():
    return build_error_graph(get_code("bitflip3", gamma=1.0, kappa=40.0))


def _distribution(graph, weights: dict[str, float]) -> np.ndarray:
    p = np.zeros(graph.dim)
    for label, w in weights.items():
        p[graph.index_of(label)] = w
    return p


class TestInfoBound:
    """Test J_t and its ingredients."""

    def test_vertex(self, graph):
        """Test that a certain state has J = p* = 1."""
        snap = info_bound(FilterState.vertex(graph.dim, 0), graph)
        assert snap.J == 1.0
        assert snap.p_star == 1.0
        assert snap.argmax == 0

    def test_handcrafted_state(self, graph):
        """Test J and exclusions on a hand-built distribution."""
        p = _distribution(graph, {"III": 0.6, "XXX": 0.2, "IXI": 0.1, "XIX": 0.1})
        snap = info_bound(FilterState(p), graph)
        assert snap.syndrome_probs[0] == pytest.approx(0.8)
        assert snap.syndrome_probs[1] == pytest.approx(0.2)
        assert snap.J == pytest.approx(0.75)
        assert snap.argmax == graph.index_of("III")
        assert snap.p_star == pytest.approx(0.6)
        assert snap.excluded == 4

    def test_tie_break(self, graph):
        """Test that the lowest state index wins a tie of ratios."""
        p = _distribution(graph, {"III": 0.375, "XXX": 0.125, "IXI": 0.375, "XIX": 0.125})
        snap = info_bound(FilterState(p), graph)
        assert snap.J == 0.75
        assert snap.argmax == 0

    def test_dominates_state_probability(self, graph):
        """Test p* <= J on random distributions."""
        p = make_generator(1).dirichlet(np.ones(graph.dim), size=200)
        bound, p_star, _ = bound_series(p, graph)
        assert np.all(p_star <= bound + 1e-12)

    def test_series_matches_snapshots(self, graph):
        """Test the batched bound against single snapshots."""
        p = make_generator(2).dirichlet(np.ones(graph.dim), size=5)
        bound, p_star, argmax = bound_series(p, graph)
        for b in range(5):
            snap = info_bound(FilterState(p[b]), graph)
            assert bound[b] == pytest.approx(snap.J)
            assert argmax[b] == snap.argmax

    def test_per_class_equals_per_string_for_bitflip(self, graph):
        """Test that singleton classes make the two modes agree."""
        p = make_generator(3).dirichlet(np.ones(graph.dim))
        a = info_bound(FilterState(p), graph, "per-string")
        b = info_bound(FilterState(p), graph, "per-class")
        assert a.J == pytest.approx(b.J)

    def test_per_class_five_qubit(self):
        """Test that class lumping raises the five-qubit bound."""
        graph = build_error_graph(get_code("five_qubit"))
        p = make_generator(4).dirichlet(np.ones(graph.dim))
        per_string = info_bound(FilterState(p), graph, "per-string")
        per_class = info_bound(FilterState(p), graph, "per-class")
        assert len(per_class.I) == 64
        assert per_class.J >= per_string.J

    def test_unknown_mode(self, graph):
        """Test mode validation."""
        with pytest.raises(ValueError):
            conditional_ratios(np.full(graph.dim, 1 / graph.dim), graph, "per-qubit")


class TestDerivative:
    """Test the rate of change of J."""

    def test_formula_matches_exact_rates(self, graph):
        """Test the closed form against the lumped-drift rates at the argmax."""
        chain = chain_from_graph(graph)
        for p in make_generator(5).dirichlet(np.ones(graph.dim), size=20):
            snap = info_bound(FilterState(p), graph)
            expected = info_ratio_rates(p, chain, graph)[snap.argmax]
            assert info_bound_derivative(snap, chain, graph) == pytest.approx(expected, rel=1e-10)

    def test_formula_on_class_chain(self):
        """Test the closed form on the five-qubit class-lumped chain."""
        lumped = class_graph(get_code("five_qubit"))
        chain = chain_from_graph(lumped)
        for p in make_generator(6).dirichlet(np.ones(lumped.dim), size=5):
            snap = info_bound(FilterState(p), lumped)
            expected = info_ratio_rates(p, chain, lumped)[snap.argmax]
            assert info_bound_derivative(snap, chain, lumped) == pytest.approx(expected, rel=1e-10)

    def test_non_positive(self, graph):
        """Test that J never increases."""
        chain = chain_from_graph(graph)
        for p in make_generator(7).dirichlet(np.ones(graph.dim), size=50):
            assert info_bound_derivative(info_bound(FilterState(p), graph), chain, graph) <= 1e-12

    def test_dimension_mismatch(self, graph):
        """Test that the snapshot and chain must index the same states."""
        five = build_error_graph(get_code("five_qubit"))
        snap = info_bound(FilterState.vertex(graph.dim, 0), graph)
        with pytest.raises(ValueError):
            info_bound_derivative(snap, chain_from_graph(five), five)


class TestPolicies:
    """Test correction decisions and scoring."""

    def test_naive_follows_syndrome_table(self, graph):
        """Test the naive decision for every syndrome."""
        for s, label in enumerate(["III", "IXI", "IIX", "XII"]):
            marginals = np.eye(4)[s]
            assert naive_policy(FilterState(marginals), graph).label == label

    def test_naive_wrong_dimension(self, graph):
        """Test that the naive policy wants syndrome probabilities."""
        with pytest.raises(ValueError):
            naive_policy(FilterState.uniform(graph.dim), graph)

    def test_optimal_picks_most_likely_state(self, graph):
        """Test the extended-chain decision when it differs from the naive one."""
        p = _distribution(graph, {"III": 0.3, "XXX": 0.1, "XXI": 0.35, "IIX": 0.25})
        state = FilterState(p)
        assert optimal_policy(state, graph).label == "XXI"
        naive = naive_policy(FilterState(graph.syndrome_marginals(p)), graph)
        assert naive.label == "IIX"

    def test_scoring(self):
        """Test success up to stabilizers and failure on logical flips."""
        code = get_code("bitflip3")
        xii = PauliString.from_label("XII")
        assert score_recovery(xii, xii, code)
        assert not score_recovery(PauliString.from_label("IXX"), xii, code)
        five = get_code("five_qubit")
        assert score_recovery(PauliString.identity(5), PauliString.from_label("XZZXI"), five)

    def test_per_class_policy(self):
        """Test that the per-class decision returns a class representative."""
        graph = build_error_graph(get_code("five_qubit"))
        p = make_generator(8).dirichlet(np.ones(graph.dim))
        choice = optimal_policy(FilterState(p), graph, "per-class")
        assert choice in graph.class_representatives

    def test_per_class_policy_sums_over_the_coset(self):
        """Test that a coset split thinly over its strings beats one heavier string."""
        graph = build_error_graph(get_code("five_qubit"))
        target = graph.class_of[graph.index_of("XIIII")]
        members = graph.class_members(target)
        decoy = graph.index_of("ZIIII")
        assert len(members) == 16 and decoy not in members

        p = np.full(graph.dim, 0.35 / (graph.dim - len(members) - 1))
        p[members] = 0.6 / len(members)
        p[decoy] = 0.05
        state = FilterState(p / p.sum())
        assert state.argmax == decoy
        assert optimal_policy(state, graph, "per-class") == graph.class_representatives[target]
        assert optimal_policy(state, graph, "per-string") == graph.nodes[decoy]

    def test_policies_agree_on_a_dominant_leader(self, graph):
        """Test naive and optimal agree when one syndrome pair holds all mass, leader first."""
        rng = make_generator(9)
        for s in range(graph.n_syndromes):
            leader = graph.syndrome_leaders[s]
            partner = next(m for m in graph.syndrome_members(s) if graph.nodes[m] != leader)
            for w in rng.uniform(0.55, 1.0, size=10):
                p = np.zeros(graph.dim)
                p[graph.index_of(leader)] = w
                p[partner] = 1.0 - w
                naive = naive_policy(FilterState(graph.syndrome_marginals(p)), graph)
                assert naive == optimal_policy(FilterState(p), graph) == leader

    @pytest.mark.parametrize("scale", [1e-3, 0.5, 7.0])
    def test_policies_ignore_overall_scale(self, scale):
        """Test that rescaling the unnormalized state leaves every decision alone."""
        graph = build_error_graph(get_code("five_qubit"))
        p = make_generator(10).dirichlet(np.ones(graph.dim))
        for mode in ("per-string", "per-class"):
            assert optimal_policy(FilterState(scale * p), graph, mode) == optimal_policy(
                FilterState(p), graph, mode
            )
        marginals = graph.syndrome_marginals(p)
        assert naive_policy(FilterState(scale * marginals), graph) == naive_policy(
            FilterState(marginals), graph
        )


class TestExport:
    """Test the metrics CSV."""

    def test_header_and_rows(self, graph, tmp_path):
        """Test column layout."""
        snaps = [info_bound(FilterState.vertex(graph.dim, 0, t=0.0), graph)]
        lines = snapshots_to_csv(snaps, tmp_path / "m.csv").read_text().splitlines()
        assert lines[0] == "t,p_star,J,argmax,P0,P1,P2,P3"
        assert lines[1] == "0,1,1,0,1,0,0,0"
