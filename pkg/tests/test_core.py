import numpy as np
import pytest

from mfg_egta import (
    ActionSet,
    Flow,
    MixedStrategy,
    StateSpace,
    Strategy,
    Topology,
    TransitionKernel,
    aggregate_strategy,
    deterministic_strategy,
    propagate_flow,
    random_strategy,
    uniform_strategy,
)

from conftest import random_kernel, random_simplex


def stay_kernel(n_states, n_actions):
    probs = np.zeros((n_states, n_actions, n_states))
    for x in range(n_states):
        probs[x, :, x] = 1.0
    return TransitionKernel(probs)


def shift_kernel(n_states, moves):
    probs = np.zeros((n_states, len(moves), n_states))
    for a, move in enumerate(moves):
        for x in range(n_states):
            probs[x, a, (x + move) % n_states] = 1.0
    return TransitionKernel(probs)


class TestTypes:
    def test_state_space_torus2d_requires_matching_area(self):
        StateSpace(6, Topology.TORUS_2D, width=3, height=2)
        with pytest.raises(ValueError, match="width"):
            StateSpace(7, Topology.TORUS_2D, width=3, height=2)

    def test_state_space_rejects_empty(self):
        with pytest.raises(ValueError):
            StateSpace(0)

    def test_action_labels_must_be_distinct(self):
        with pytest.raises(ValueError, match="distinct"):
            ActionSet(2, ("go", "go"))
        assert ActionSet(2).labels == ("a0", "a1")

    def test_kernel_rejects_nonstochastic_row_naming_state_action(self):
        probs = np.zeros((2, 2, 2))
        probs[:, :, 0] = 1.0
        probs[1, 1] = (0.45, 0.45)  # sums to 0.9
        with pytest.raises(ValueError, match=r"\(1, 1\)"):
            TransitionKernel(probs)

    def test_strategy_rejects_negative_entries(self):
        tables = np.full((1, 1, 2), 0.5)
        tables[0, 0] = (1.5, -0.5)
        with pytest.raises(ValueError, match="negative"):
            Strategy(tables)

    def test_flow_rejects_bad_slice(self):
        dists = np.array([[0.5, 0.5], [0.6, 0.6]])
        with pytest.raises(ValueError, match="slice 1"):
            Flow(dists)

    def test_mixed_strategy_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sums"):
            MixedStrategy(np.array([0.5, 0.4]))

    def test_arrays_are_frozen(self):
        strategy = uniform_strategy(1, 2, 2)
        with pytest.raises(ValueError):
            strategy.tables[0, 0, 0] = 1.0

    def test_strategy_normalized_classmethod(self):
        s = Strategy.normalized(np.array([[[2.0, 2.0], [1.0, 3.0]]]))
        np.testing.assert_array_equal(s.tables[0, 0], [0.5, 0.5])
        with pytest.raises(ValueError, match="nonpositive"):
            Strategy.normalized(np.zeros((1, 1, 2)))

    def test_deterministic_strategy_one_hot(self):
        s = deterministic_strategy([[1, 0], [0, 1]], 2)
        assert s.horizon == 1
        np.testing.assert_array_equal(s.tables[0, 0], [0.0, 1.0])
        np.testing.assert_array_equal(s.tables[1, 1], [0.0, 1.0])


class TestPropagateFlow:
    def test_stay_kernel_fixes_the_flow(self):
        kernel = stay_kernel(2, 2)
        strategy = uniform_strategy(3, 2, 2)
        flow = propagate_flow(strategy, np.array([0.3, 0.7]), kernel)
        for t in range(4):
            np.testing.assert_array_equal(flow.dists[t], [0.3, 0.7])

    def test_stay_kernel_any_strategy(self):
        rng = np.random.default_rng(5)
        strategy = random_strategy(rng, 4, 3, 2)
        flow = propagate_flow(strategy, random_simplex(rng, 3), stay_kernel(3, 2))
        for t in range(1, 5):
            np.testing.assert_allclose(flow.dists[t], flow.dists[0], atol=1e-12)

    def test_swap_kernel_alternates(self):
        kernel = shift_kernel(2, [1])
        strategy = uniform_strategy(2, 2, 1)
        flow = propagate_flow(strategy, np.array([1.0, 0.0]), kernel)
        np.testing.assert_array_equal(flow.dists, [[1, 0], [0, 1], [1, 0]])

    def test_half_half_moves_on_three_torus(self):
        # Actions move +1 and -1; an even split from a point mass lands half
        # on each neighbour. Cross-checked by the explicit triple sum.
        kernel = shift_kernel(3, [1, -1])
        tables = np.full((2, 3, 2), 0.5)
        strategy = Strategy(tables)
        initial = np.array([1.0, 0.0, 0.0])
        flow = propagate_flow(strategy, initial, kernel)
        np.testing.assert_allclose(flow.dists[1], [0.0, 0.5, 0.5], atol=1e-15)

        brute = np.zeros(3)
        for x in range(3):
            for a in range(2):
                for y in range(3):
                    brute[y] += initial[x] * tables[0, x, a] * kernel.probs[x, a, y]
        np.testing.assert_allclose(flow.dists[1], brute, atol=1e-15)

    def test_shape_mismatch_rejected(self):
        kernel = stay_kernel(2, 2)
        with pytest.raises(ValueError, match="does not match kernel"):
            propagate_flow(uniform_strategy(1, 3, 2), np.array([0.5, 0.5]), kernel)
        with pytest.raises(ValueError, match="initial distribution"):
            propagate_flow(uniform_strategy(1, 2, 2), np.array([0.5, 0.3, 0.2]), kernel)

    def test_mass_conservation_random_instances(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n_states = int(rng.integers(1, 6))
            n_actions = int(rng.integers(1, 4))
            horizon = int(rng.integers(0, 8))
            kernel = TransitionKernel(random_kernel(rng, n_states, n_actions))
            strategy = random_strategy(rng, horizon, n_states, n_actions)
            flow = propagate_flow(strategy, random_simplex(rng, n_states), kernel)
            assert np.all(flow.dists >= 0.0)
            np.testing.assert_allclose(flow.dists.sum(axis=1), 1.0, atol=1e-12)

    def test_linearity_in_initial_distribution(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            kernel = TransitionKernel(random_kernel(rng, 4, 2))
            strategy = random_strategy(rng, 3, 4, 2)
            d1, d2 = random_simplex(rng, 4), random_simplex(rng, 4)
            alpha = float(rng.uniform())
            mixed = propagate_flow(strategy, alpha * d1 + (1 - alpha) * d2, kernel)
            f1 = propagate_flow(strategy, d1, kernel)
            f2 = propagate_flow(strategy, d2, kernel)
            np.testing.assert_allclose(
                mixed.dists, alpha * f1.dists + (1 - alpha) * f2.dists, atol=1e-12
            )

    def test_determinism(self):
        rng = np.random.default_rng(17)
        kernel = TransitionKernel(random_kernel(rng, 5, 3))
        strategy = random_strategy(rng, 6, 5, 3)
        initial = random_simplex(rng, 5)
        a = propagate_flow(strategy, initial, kernel)
        b = propagate_flow(strategy, initial, kernel)
        np.testing.assert_array_equal(a.dists, b.dists)


class TestAggregateStrategy:
    def _flow(self, strategy, initial, kernel):
        return propagate_flow(strategy, initial, kernel)

    def test_singleton_mixture_returns_member(self):
        rng = np.random.default_rng(3)
        kernel = TransitionKernel(random_kernel(rng, 3, 2))
        s = random_strategy(rng, 2, 3, 2)
        f = self._flow(s, random_simplex(rng, 3), kernel)
        merged = aggregate_strategy(MixedStrategy(np.array([1.0])), [s], [f])
        np.testing.assert_allclose(merged.tables, s.tables, atol=1e-15)

    def test_identical_members_any_weights(self):
        rng = np.random.default_rng(4)
        kernel = TransitionKernel(random_kernel(rng, 3, 2))
        s = random_strategy(rng, 2, 3, 2)
        f = self._flow(s, random_simplex(rng, 3), kernel)
        merged = aggregate_strategy(MixedStrategy(np.array([0.4, 0.6])), [s, s], [f, f])
        np.testing.assert_allclose(merged.tables, s.tables, atol=1e-14)

    def test_even_mix_of_pure_actions_from_uniform_start(self):
        kernel = stay_kernel(2, 2)
        always0 = deterministic_strategy(np.zeros((2, 2), dtype=int), 2)
        always1 = deterministic_strategy(np.ones((2, 2), dtype=int), 2)
        initial = np.array([0.5, 0.5])
        f0 = self._flow(always0, initial, kernel)
        f1 = self._flow(always1, initial, kernel)
        mixed = MixedStrategy(np.array([0.5, 0.5]))
        merged = aggregate_strategy(mixed, [always0, always1], [f0, f1])
        np.testing.assert_allclose(merged.tables[0, :, 0], 0.5, atol=1e-15)

        # The merged strategy's flow must equal the weight-averaged member flows.
        averaged = 0.5 * f0.dists + 0.5 * f1.dists
        merged_flow = self._flow(merged, initial, kernel)
        np.testing.assert_allclose(merged_flow.dists, averaged, atol=1e-12)

    def test_zero_mass_states_get_uniform_rows(self):
        kernel = stay_kernel(2, 2)
        s = deterministic_strategy(np.zeros((1, 2), dtype=int), 2)
        f = Flow(np.array([[1.0, 0.0]]))  # state 1 never visited
        merged = aggregate_strategy(MixedStrategy(np.array([1.0])), [s], [f])
        np.testing.assert_array_equal(merged.tables[0, 1], [0.5, 0.5])
        np.testing.assert_array_equal(merged.tables[0, 0], [1.0, 0.0])

    def test_length_mismatch_rejected(self):
        rng = np.random.default_rng(6)
        kernel = TransitionKernel(random_kernel(rng, 2, 2))
        s = random_strategy(rng, 1, 2, 2)
        f = self._flow(s, np.array([0.5, 0.5]), kernel)
        with pytest.raises(ValueError, match="mixture over"):
            aggregate_strategy(MixedStrategy(np.array([0.5, 0.5])), [s], [f])

    def test_flow_equivalence_random_instances(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            n_states = int(rng.integers(2, 5))
            n_actions = int(rng.integers(1, 4))
            horizon = int(rng.integers(0, 6))
            n_members = int(rng.integers(1, 5))
            kernel = TransitionKernel(random_kernel(rng, n_states, n_actions))
            initial = random_simplex(rng, n_states)
            members = [
                random_strategy(rng, horizon, n_states, n_actions) for _ in range(n_members)
            ]
            flows = [propagate_flow(s, initial, kernel) for s in members]
            mixed = MixedStrategy(random_simplex(rng, n_members))
            merged = aggregate_strategy(mixed, members, flows)
            merged_flow = propagate_flow(merged, initial, kernel)
            averaged = np.einsum(
                "k,ktx->tx", mixed.weights, np.stack([f.dists for f in flows])
            )
            np.testing.assert_allclose(merged_flow.dists, averaged, atol=1e-9)
