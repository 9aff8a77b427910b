"""Tests for jump chains and exact path sampling."""

import numpy as np
import pytest
from scipy import stats
from qtrack.core.rng import make_generator
from qtrack.dynamics.chain import (
    chain_from_graph,
    sample_jump_path,
    transient_distribution,
    unraveled_probabilities,
)
from qtrack.stabilizer.codes import build_error_graph, get_code


@pytest.fixture
def bitflip():
    graph = build_error_graph(get_code("bitflip3", gamma=1.0, kappa=40.0))
    return graph, chain_from_graph(graph)


class TestJumpChain:
    """Test the intensity matrix and observation levels."""

    def test_rows_sum_to_zero(self, bitflip):
        """Test the generator property."""
        _, chain = bitflip
        assert np.allclose(chain.dense_intensity().sum(axis=1), 0.0)
        assert np.allclose(chain.exit_rates, 3.0)

    def test_rates_follow_edges(self, bitflip):
        """Test that off-diagonal rates sit exactly on graph edges."""
        graph, chain = bitflip
        dense = chain.dense_intensity()
        for m in range(graph.dim):
            off = [n for n in range(graph.dim) if n != m and dense[m, n] != 0]
            assert off == graph.neighbor_set(m)
        assert np.allclose(dense, dense.T)

    def test_observation_levels(self, bitflip):
        """Test h = 2 sqrt(kappa) times the generator outcomes."""
        graph, chain = bitflip
        level = 2 * np.sqrt(40.0)
        assert np.allclose(chain.obs_levels[:, graph.index_of("III")], [level, level])
        assert np.allclose(chain.obs_levels[:, graph.index_of("XII")], [-level, -level])
        assert np.allclose(chain.obs_levels[:, graph.index_of("IXI")], [-level, level])


class TestSampling:
    """Test exact sampling of jump paths."""

    def test_reproducible(self, bitflip):
        """Test that equal generators give equal paths."""
        _, chain = bitflip
        a = sample_jump_path(chain, 0, 5.0, make_generator(1, 0))
        b = sample_jump_path(chain, 0, 5.0, make_generator(1, 0))
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.states, b.states)

    def test_path_is_consistent(self, bitflip):
        """Test increasing times within the horizon and channel-consistent states."""
        _, chain = bitflip
        path = sample_jump_path(chain, 0, 10.0, make_generator(2))
        assert path.n_events > 0
        assert np.all(np.diff(path.times) > 0)
        assert path.times[-1] <= 10.0
        previous = np.concatenate(([0], path.states[:-1]))
        assert np.array_equal(chain.channel_targets[previous, path.channels], path.states)

    def test_state_at_jump_time(self, bitflip):
        """Test that a jump takes effect at its own time."""
        _, chain = bitflip
        path = sample_jump_path(chain, 0, 10.0, make_generator(3))
        assert path.state_at(0.0) == 0
        assert path.state_at(path.times[0]) == path.states[0]
        assert path.state_at(10.0) == path.terminal_state

    def test_zero_rate_never_jumps(self):
        """Test that gamma = 0 produces no events."""
        chain = chain_from_graph(build_error_graph(get_code("bitflip3", gamma=0.0)))
        path = sample_jump_path(chain, 0, 10.0, make_generator(4))
        assert path.n_events == 0
        assert path.terminal_state == 0

    def test_invalid_arguments(self, bitflip):
        """Test argument validation."""
        _, chain = bitflip
        with pytest.raises(ValueError):
            sample_jump_path(chain, 0, 0.0, make_generator(5))
        with pytest.raises(ValueError):
            sample_jump_path(chain, 8, 1.0, make_generator(5))

    def test_event_count_is_poisson(self, bitflip):
        """Test the mean number of events over [0, T] against 3 gamma T."""
        _, chain = bitflip
        rng = make_generator(6)
        counts = np.array([sample_jump_path(chain, 0, 1.0, rng).n_events for _ in range(10_000)])
        se = counts.std(ddof=1) / np.sqrt(len(counts))
        assert abs(counts.mean() - 3.0) < 3 * se

    def test_holding_times_are_exponential(self, bitflip):
        """Test first holding times against Exponential(3 gamma)."""
        _, chain = bitflip
        rng = make_generator(7)
        first = np.array([sample_jump_path(chain, 0, 50.0, rng).times[0] for _ in range(10_000)])
        assert stats.kstest(first, "expon", args=(0, 1 / 3.0)).pvalue > 0.01

    @pytest.mark.parametrize("t", [0.1, 1.0])
    def test_occupancy_matches_matrix_exponential(self, bitflip, t):
        """Test ensemble occupancies against exp(L^T t) p0."""
        graph, chain = bitflip
        rng = make_generator(8)
        n = 4000
        states = [sample_jump_path(chain, 0, t, rng).terminal_state for _ in range(n)]
        empirical = np.bincount(states, minlength=graph.dim) / n
        p0 = np.eye(graph.dim)[0]
        exact = transient_distribution(chain, p0, t)
        se = np.sqrt(exact * (1 - exact) / n)
        assert np.all(np.abs(empirical - exact) <= 4 * se + 1e-3)


class TestUnraveling:
    """Test the indicator path of the jump-unraveled dynamics."""

    def test_indicator_path(self, bitflip):
        """Test that each row is the unit vector of the occupied state."""
        graph, chain = bitflip
        path = sample_jump_path(chain, 0, 2.0, make_generator(9))
        dt = 0.01
        p = unraveled_probabilities(path, graph.dim, 200, dt)
        assert p.shape == (201, graph.dim)
        assert np.allclose(p.sum(axis=1), 1.0)
        assert np.array_equal(p.argmax(axis=1), path.state_at(np.arange(201) * dt))
