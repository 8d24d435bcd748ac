"""Shared fixtures: random game generators and independent evaluation oracles."""

from __future__ import annotations

import itertools

import numpy as np

from mfg_egta import (
    CallableReward,
    RewardModel,
    Strategy,
    TabularMFG,
    build_custom,
    deterministic_strategy,
)


def random_kernel(rng: np.random.Generator, n_states: int, n_actions: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))


def random_simplex(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


class TabularInteractionReward(RewardModel):
    """base[i][x][a] plus a linear own/cross crowd term coupling[i][j]*mu_j(x)."""

    def __init__(self, base: np.ndarray, coupling: np.ndarray):
        self.base = np.asarray(base, dtype=np.float64)
        self.coupling = np.asarray(coupling, dtype=np.float64)

    def stage_rewards(self, pop, mu_slice):
        crowd = self.coupling[pop] @ mu_slice
        return self.base[pop] + crowd[:, None]


class FlowOnlyReward(RewardModel):
    """Reward ignoring state and action: a linear functional of the own-population
    distribution. Every strategy then earns the same total, so any mixture is an
    exact equilibrium."""

    def __init__(self, offsets: np.ndarray, weights: np.ndarray, n_actions: int):
        self.offsets = np.asarray(offsets, dtype=np.float64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.n_actions = n_actions

    def stage_rewards(self, pop, mu_slice):
        value = self.offsets[pop] + float(self.weights[pop] @ mu_slice[pop])
        return np.full((mu_slice.shape[1], self.n_actions), value)


def random_game(
    rng: np.random.Generator,
    n_pops: int = 1,
    n_states: int = 3,
    n_actions: int = 2,
    horizon: int = 2,
) -> TabularMFG:
    """Random tabular game with mildly crowd-coupled rewards."""
    base = rng.uniform(0.0, 1.0, size=(n_pops, n_states, n_actions))
    coupling = rng.uniform(-1.0, 1.0, size=(n_pops, n_pops))
    dists = np.stack([random_simplex(rng, n_states) for _ in range(n_pops)])
    return build_custom(
        n_populations=n_pops,
        kernel=random_kernel(rng, n_states, n_actions),
        reward=TabularInteractionReward(base, coupling),
        horizon=horizon,
        initial_dists=dists,
    )


def flow_only_game(
    rng: np.random.Generator,
    n_pops: int = 1,
    n_states: int = 2,
    n_actions: int = 2,
    horizon: int = 1,
) -> TabularMFG:
    reward = FlowOnlyReward(
        rng.uniform(-1.0, 1.0, size=n_pops),
        rng.uniform(-1.0, 1.0, size=(n_pops, n_states)),
        n_actions,
    )
    dists = np.stack([random_simplex(rng, n_states) for _ in range(n_pops)])
    return build_custom(
        n_populations=n_pops,
        kernel=random_kernel(rng, n_states, n_actions),
        reward=reward,
        horizon=horizon,
        initial_dists=dists,
    )


def dominant_action_game(
    rng: np.random.Generator,
    n_states: int = 2,
    n_actions: int = 2,
    horizon: int = 1,
) -> tuple[TabularMFG, Strategy]:
    """mu-independent game with a per-state action whose bonus dwarfs any
    continuation spread, so the optimal strategy is known in closed form."""
    base = rng.uniform(0.0, 1.0, size=(n_states, n_actions))
    best = rng.integers(0, n_actions, size=n_states)
    bonus = 100.0 * (horizon + 2)
    table = base.copy()
    table[np.arange(n_states), best] += bonus

    game = build_custom(
        n_populations=1,
        kernel=random_kernel(rng, n_states, n_actions),
        reward=CallableReward(lambda i, x, a, mu: float(table[x, a]), n_states, n_actions),
        horizon=horizon,
        initial_dists=random_simplex(rng, n_states)[None, :],
    )
    optimum = deterministic_strategy(np.tile(best, (horizon + 1, 1)), n_actions)
    return game, optimum


def enumerate_deterministic_strategies(n_states: int, n_actions: int, horizon: int):
    """All one-hot strategies, ordered lexicographically by action picks."""
    slots = (horizon + 1) * n_states
    for picks in itertools.product(range(n_actions), repeat=slots):
        actions = np.asarray(picks, dtype=np.intp).reshape(horizon + 1, n_states)
        yield deterministic_strategy(actions, n_actions)


def trajectory_value(strategy: Strategy, flows, pop: int, game: TabularMFG) -> float:
    """Utility by explicit summation over every state/action trajectory.

    Independent of the dynamic-programming path: pure Python loops over all
    (x_0, a_0, ..., x_T, a_T) sequences weighted by their probabilities.
    """
    mu = np.stack([f.dists for f in flows])
    total = 0.0
    horizon = game.horizon
    states = range(game.n_states)
    actions = range(game.n_actions)

    def extend(t, x, prob, reward_sum):
        nonlocal total
        if prob == 0.0:
            return
        for a in actions:
            p_a = prob * strategy.tables[t, x, a]
            r = reward_sum + game.reward(pop, x, a, mu[:, t])
            if t == horizon:
                total += p_a * r
            else:
                for y in states:
                    extend(t + 1, y, p_a * game.kernel.probs[x, a, y], r)

    for x0 in states:
        extend(0, x0, float(flows[pop].dists[0, x0]), 0.0)
    return total
