"""Exact strategy evaluation and best responses against fixed population
flows, by backward dynamic programming over the finite horizon, plus the
regret/exploitability report and the explicit payoff-matrix construction for
single-population empirical games.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Sequence

import numpy as np

from ._parallel import population_map
from ._validation import as_float_array, freeze
from .core import (
    Flow,
    MixedStrategy,
    Strategy,
    TabularMFG,
    aggregate_strategy,
    propagate_flow,
)

if TYPE_CHECKING:
    from .solvers import EmpiricalGame

# A best response must dominate every evaluated strategy up to this slack;
# a larger shortfall indicates an internal inconsistency, not float noise.
BR_DOMINANCE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Backward value function V_t(x) for t in {0..T+1}; row T+1 is zero."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = as_float_array(self.values, "value table")
        if values.ndim != 2:
            raise ValueError(f"value table must have shape (T+2, states), got {values.shape}")
        object.__setattr__(self, "values", freeze(values))

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 2


@dataclass(frozen=True)
class PopulationRegret:
    best_response_value: float
    current_value: float
    regret: float


@dataclass(frozen=True)
class RegretReport:
    """Per-population deviation gains and their sum (the profile's regret)."""

    per_population: tuple[PopulationRegret, ...]
    total: float

    def __post_init__(self) -> None:
        for i, entry in enumerate(self.per_population):
            if entry.regret < 0.0:
                raise ValueError(f"population {i} has negative regret {entry.regret!r}")
        if abs(self.total - sum(entry.regret for entry in self.per_population)) > 1e-12:
            raise ValueError("total regret does not equal the per-population sum")

    @classmethod
    def from_values(cls, pairs: Sequence[tuple[float, float]]) -> "RegretReport":
        """Build from (best_response_value, current_value) pairs, clamping
        sub-slack float noise to zero."""
        entries = []
        for i, (br_value, current) in enumerate(pairs):
            gap = br_value - current
            if gap < -BR_DOMINANCE_SLACK:
                raise ArithmeticError(
                    f"best-response value {br_value!r} falls below the evaluated "
                    f"value {current!r} for population {i}; the gap {gap!r} exceeds "
                    f"float noise"
                )
            entries.append(PopulationRegret(br_value, current, max(0.0, gap)))
        return cls(tuple(entries), sum(e.regret for e in entries))


class BestResponse(NamedTuple):
    strategy: Strategy
    value: float


def _check_eval_inputs(flows: Sequence[Flow], pop: int, game: TabularMFG) -> None:
    if len(flows) != game.n_populations:
        raise ValueError(f"got {len(flows)} flows for {game.n_populations} populations")
    for j, flow in enumerate(flows):
        if flow.dists.shape != (game.horizon + 1, game.n_states):
            raise ValueError(
                f"flow {j} has shape {flow.dists.shape}, expected "
                f"({game.horizon + 1}, {game.n_states})"
            )
    if not 0 <= pop < game.n_populations:
        raise ValueError(f"population index {pop} out of range")


def _check_strategy(strategy: Strategy, game: TabularMFG) -> None:
    expected = (game.horizon + 1, game.n_states, game.n_actions)
    if strategy.tables.shape != expected:
        raise ValueError(f"strategy has shape {strategy.tables.shape}, expected {expected}")


def _stacked_values(tables: np.ndarray, flows: Sequence[Flow], pop: int, game: TabularMFG) -> np.ndarray:
    """Evaluate a (K, T+1, X, A) stack of strategy tables against fixed flows,
    sharing the per-step reward tables across the stack. Returns (K,) values."""
    mu = np.stack([flow.dists for flow in flows])
    values = np.zeros((tables.shape[0], game.n_states))
    for t in range(game.horizon, -1, -1):
        rewards = game.reward.stage_rewards(pop, mu[:, t])
        q = rewards[None, :, :] + np.einsum("xay,ky->kxa", game.kernel.probs, values)
        values = np.einsum("kxa,kxa->kx", tables[:, t], q)
    return values @ flows[pop].dists[0]


def value_table(strategy: Strategy, flows: Sequence[Flow], pop: int, game: TabularMFG) -> ValueTable:
    """Backward policy evaluation of one strategy against fixed flows."""
    _check_eval_inputs(flows, pop, game)
    _check_strategy(strategy, game)
    mu = np.stack([flow.dists for flow in flows])
    values = np.zeros((game.horizon + 2, game.n_states))
    for t in range(game.horizon, -1, -1):
        rewards = game.reward.stage_rewards(pop, mu[:, t])
        q = rewards + np.einsum("xay,y->xa", game.kernel.probs, values[t + 1])
        values[t] = np.einsum("xa,xa->x", strategy.tables[t], q)
    return ValueTable(values)


def evaluate(strategy: Strategy, flows: Sequence[Flow], pop: int, game: TabularMFG) -> float:
    """Expected total reward of a representative player of ``pop`` playing
    ``strategy`` while every population follows its fixed flow."""
    table = value_table(strategy, flows, pop, game)
    return float(flows[pop].dists[0] @ table.values[0])


def evaluate_mixed(
    mixed: MixedStrategy,
    strategies: Sequence[Strategy],
    flows: Sequence[Flow],
    pop: int,
    game: TabularMFG,
) -> float:
    """Utility of a mixture at fixed flows: the weighted sum of pure utilities."""
    if len(mixed) != len(strategies):
        raise ValueError(f"mixture over {len(mixed)} weights given {len(strategies)} strategies")
    _check_eval_inputs(flows, pop, game)
    for s in strategies:
        _check_strategy(s, game)
    stack = np.stack([s.tables for s in strategies])
    return float(mixed.weights @ _stacked_values(stack, flows, pop, game))


def best_response(flows: Sequence[Flow], pop: int, game: TabularMFG) -> BestResponse:
    """Exact best response to fixed flows by backward induction.

    The returned strategy is deterministic; argmax ties break to the lowest
    action index under strict float comparison, keeping runs bit-reproducible.
    """
    _check_eval_inputs(flows, pop, game)
    mu = np.stack([flow.dists for flow in flows])
    values = np.zeros(game.n_states)
    tables = np.zeros((game.horizon + 1, game.n_states, game.n_actions))
    state_idx = np.arange(game.n_states)
    for t in range(game.horizon, -1, -1):
        rewards = game.reward.stage_rewards(pop, mu[:, t])
        q = rewards + np.einsum("xay,y->xa", game.kernel.probs, values)
        greedy = q.argmax(axis=1)
        values = q[state_idx, greedy]
        tables[t, state_idx, greedy] = 1.0
    return BestResponse(Strategy(tables), float(flows[pop].dists[0] @ values))


def exploitability(
    mixed: Sequence[MixedStrategy],
    empirical: "EmpiricalGame",
    game: TabularMFG,
    parallel: bool = False,
) -> RegretReport:
    """Regret report of a mixed profile over an empirical game.

    Aggregates each population's mixture into its equivalent behavioral
    strategy, propagates the induced flows, and measures each population's
    gain from deviating to an unconstrained best response.
    """
    if len(mixed) != game.n_populations:
        raise ValueError(f"got {len(mixed)} mixtures for {game.n_populations} populations")
    induced = []
    for i in range(game.n_populations):
        merged = aggregate_strategy(mixed[i], empirical.strategies(i), empirical.flows(i))
        induced.append(propagate_flow(merged, game.initial_dists[i], game.kernel))

    def deviation_gain(i: int) -> tuple[float, float]:
        br = best_response(induced, i, game)
        current = evaluate_mixed(mixed[i], empirical.strategies(i), induced, i, game)
        return br.value, current

    pairs = population_map(deviation_gain, game.n_populations, parallel)
    return RegretReport.from_values(pairs)


def payoff_matrix(empirical: "EmpiricalGame", game: TabularMFG) -> np.ndarray:
    """Explicit single-population payoff matrix M[j][k] = u(s_j, flow(s_k)).

    Only used to exhibit that the matrix game's equilibrium generally differs
    from the mean-field equilibrium of the same restricted set.
    """
    if game.n_populations != 1 or empirical.n_populations != 1:
        raise ValueError("payoff matrices are only defined for single-population games")
    strategies = empirical.strategies(0)
    flows = empirical.flows(0)
    k = len(strategies)
    stack = np.stack([s.tables for s in strategies])
    matrix = np.empty((k, k))
    for col in range(k):
        matrix[:, col] = _stacked_values(stack, [flows[col]], 0, game)
    return matrix


__all__ = [
    "BR_DOMINANCE_SLACK",
    "ValueTable",
    "PopulationRegret",
    "RegretReport",
    "BestResponse",
    "value_table",
    "evaluate",
    "evaluate_mixed",
    "best_response",
    "exploitability",
    "payoff_matrix",
]
