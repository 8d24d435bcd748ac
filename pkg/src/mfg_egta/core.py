"""Domain types for tabular finite-horizon mean-field games, plus the two
fundamental strategy/flow operations: forward propagation of the population
distribution and flow-weighted aggregation of a strategy mixture into a
single behavioral strategy.

All types are immutable after construction (backing arrays are marked
read-only) and all operations are pure, so values can be shared freely
across threads.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._validation import (
    SIMPLEX_ATOL,
    as_float_array,
    check_rows_stochastic,
    check_simplex,
    check_unit_range,
    freeze,
)


class Topology(enum.Enum):
    """Adjacency structure of the state space, used by environment builders."""

    TORUS_1D = "torus_1d"
    TORUS_2D = "torus_2d"
    ABSTRACT = "abstract"


@dataclass(frozen=True)
class StateSpace:
    """Finite state space of size ``size``; 2-D tori carry their grid shape."""

    size: int
    topology: Topology = Topology.ABSTRACT
    width: int | None = None
    height: int | None = None

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"state space size must be >= 1, got {self.size}")
        if self.topology is Topology.TORUS_2D:
            if self.width is None or self.height is None:
                raise ValueError("a 2-D torus needs explicit width and height")
            if self.width * self.height != self.size:
                raise ValueError(
                    f"width*height = {self.width * self.height} != size {self.size}"
                )


@dataclass(frozen=True)
class ActionSet:
    """Finite action set with distinct human-readable labels."""

    size: int
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"action set size must be >= 1, got {self.size}")
        labels = tuple(self.labels) or tuple(f"a{i}" for i in range(self.size))
        if len(labels) != self.size:
            raise ValueError(f"{len(labels)} labels for {self.size} actions")
        if len(set(labels)) != len(labels):
            raise ValueError(f"action labels must be distinct, got {labels}")
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Dense transition probabilities indexed [state][action][next_state].

    Rows are validated to be probability vectors; the kernel is shared by all
    populations and does not depend on the population distribution.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = as_float_array(self.probs, "kernel")
        if probs.ndim != 3 or probs.shape[0] != probs.shape[2]:
            raise ValueError(
                f"kernel must have shape (states, actions, states), got {probs.shape}"
            )
        check_rows_stochastic(probs, "kernel")
        object.__setattr__(self, "probs", freeze(probs))

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def n_actions(self) -> int:
        return self.probs.shape[1]


@dataclass(frozen=True, eq=False)
class Strategy:
    """Time-indexed stochastic policy: one row-stochastic [state][action]
    table per decision epoch t in {0..T}."""

    tables: np.ndarray

    def __post_init__(self) -> None:
        tables = as_float_array(self.tables, "strategy")
        if tables.ndim != 3:
            raise ValueError(f"strategy must have shape (T+1, states, actions), got {tables.shape}")
        check_rows_stochastic(tables, "strategy")
        object.__setattr__(self, "tables", freeze(tables))

    @property
    def horizon(self) -> int:
        return self.tables.shape[0] - 1

    @property
    def n_states(self) -> int:
        return self.tables.shape[1]

    @property
    def n_actions(self) -> int:
        return self.tables.shape[2]

    @classmethod
    def normalized(cls, tables) -> "Strategy":
        """Build a strategy from nonnegative weights, renormalizing each row.

        This is the one sanctioned renormalization entry point; the plain
        constructor rejects rows that are off by more than the tolerance.
        """
        arr = as_float_array(tables, "strategy weights")
        sums = arr.sum(axis=-1, keepdims=True)
        if np.any(sums <= 0.0):
            raise ValueError("cannot normalize a row with nonpositive total weight")
        return cls(arr / sums)


@dataclass(frozen=True, eq=False)
class Flow:
    """Time-indexed population distribution: one point of the state simplex
    per t in {0..T} (T+1 slices, slice 0 is the initial distribution)."""

    dists: np.ndarray

    def __post_init__(self) -> None:
        dists = as_float_array(self.dists, "flow")
        if dists.ndim != 2:
            raise ValueError(f"flow must have shape (T+1, states), got {dists.shape}")
        check_unit_range(dists, "flow")
        dev = np.abs(dists.sum(axis=1) - 1.0)
        if float(dev.max()) > SIMPLEX_ATOL:
            t = int(np.argmax(dev))
            raise ValueError(
                f"flow slice {t} sums to {float(dists[t].sum())!r}, not 1 within {SIMPLEX_ATOL:g}"
            )
        object.__setattr__(self, "dists", freeze(dists))

    @property
    def horizon(self) -> int:
        return self.dists.shape[0] - 1

    @property
    def n_states(self) -> int:
        return self.dists.shape[1]


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability weights over an (externally held) ordered strategy list."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = as_float_array(self.weights, "mixture weights")
        check_simplex(weights, "mixture weights")
        object.__setattr__(self, "weights", freeze(weights))

    def __len__(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def point_mass(cls, index: int, size: int) -> "MixedStrategy":
        w = np.zeros(size)
        w[index] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, size: int) -> "MixedStrategy":
        return cls(np.full(size, 1.0 / size))


class RewardModel(abc.ABC):
    """Per-population stage reward r_i(x, a, mu_t).

    ``mu_slice`` is the time-t state distribution of every population,
    shape (n_populations, n_states). Implementations return the full
    (n_states, n_actions) stage table; the scalar form is derived.
    """

    @abc.abstractmethod
    def stage_rewards(self, pop: int, mu_slice: np.ndarray) -> np.ndarray:
        """Return the (n_states, n_actions) reward table for one population."""

    def __call__(self, pop: int, x: int, a: int, mu_slice) -> float:
        table = self.stage_rewards(pop, np.asarray(mu_slice, dtype=np.float64))
        return float(table[x, a])


class CallableReward(RewardModel):
    """Adapter turning a scalar callable ``fn(pop, x, a, mu_slice)`` into a
    :class:`RewardModel`. Intended for small hand-specified games."""

    def __init__(self, fn: Callable[[int, int, int, np.ndarray], float], n_states: int, n_actions: int):
        self._fn = fn
        self._n_states = n_states
        self._n_actions = n_actions

    def stage_rewards(self, pop: int, mu_slice: np.ndarray) -> np.ndarray:
        table = np.empty((self._n_states, self._n_actions))
        for x in range(self._n_states):
            for a in range(self._n_actions):
                table[x, a] = self._fn(pop, x, a, mu_slice)
        return table


@dataclass(frozen=True, eq=False)
class TabularMFG:
    """Complete multi-population game definition.

    The kernel, state space and action set are shared by all populations;
    rewards and initial distributions are per population. The reward model is
    probed for every population index at construction so that malformed
    callables fail here rather than mid-solve.
    """

    n_populations: int
    state_space: StateSpace
    action_set: ActionSet
    kernel: TransitionKernel
    reward: RewardModel
    horizon: int
    initial_dists: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.n_populations < 1:
            raise ValueError(f"need at least one population, got {self.n_populations}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if self.kernel.n_states != self.state_space.size:
            raise ValueError(
                f"kernel has {self.kernel.n_states} states, state space has {self.state_space.size}"
            )
        if self.kernel.n_actions != self.action_set.size:
            raise ValueError(
                f"kernel has {self.kernel.n_actions} actions, action set has {self.action_set.size}"
            )
        dists = as_float_array(self.initial_dists, "initial distributions")
        if dists.shape != (self.n_populations, self.state_space.size):
            raise ValueError(
                f"initial distributions must have shape "
                f"({self.n_populations}, {self.state_space.size}), got {dists.shape}"
            )
        for i in range(self.n_populations):
            check_simplex(dists[i], f"initial distribution of population {i}")
        object.__setattr__(self, "initial_dists", freeze(dists))
        self._probe_reward()

    def _probe_reward(self) -> None:
        probe = np.full((self.n_populations, self.state_space.size), 1.0 / self.state_space.size)
        for i in range(self.n_populations):
            try:
                table = np.asarray(self.reward.stage_rewards(i, probe), dtype=np.float64)
            except Exception as exc:
                raise ValueError(f"reward model failed for population {i}: {exc}") from exc
            expected = (self.state_space.size, self.action_set.size)
            if table.shape != expected:
                raise ValueError(
                    f"reward table for population {i} has shape {table.shape}, expected {expected}"
                )
            if not np.all(np.isfinite(table)):
                raise ValueError(f"reward table for population {i} has non-finite entries")

    @property
    def n_states(self) -> int:
        return self.state_space.size

    @property
    def n_actions(self) -> int:
        return self.action_set.size


def uniform_strategy(horizon: int, n_states: int, n_actions: int) -> Strategy:
    """The policy playing every action with equal probability at every epoch."""
    return Strategy(np.full((horizon + 1, n_states, n_actions), 1.0 / n_actions))


def random_strategy(rng: np.random.Generator, horizon: int, n_states: int, n_actions: int) -> Strategy:
    """A strategy with rows drawn uniformly from the action simplex."""
    tables = rng.dirichlet(np.ones(n_actions), size=(horizon + 1, n_states))
    return Strategy(tables)


def deterministic_strategy(actions, n_actions: int) -> Strategy:
    """One-hot strategy from an (T+1, n_states) integer table of action picks."""
    acts = np.asarray(actions, dtype=np.intp)
    if acts.ndim != 2:
        raise ValueError(f"action table must be 2-D (T+1, states), got shape {acts.shape}")
    if np.any(acts < 0) or np.any(acts >= n_actions):
        raise ValueError("action index out of range")
    tables = np.zeros(acts.shape + (n_actions,))
    t_idx, x_idx = np.indices(acts.shape)
    tables[t_idx, x_idx, acts] = 1.0
    return Strategy(tables)


def propagate_flow(strategy: Strategy, initial, kernel: TransitionKernel) -> Flow:
    """Push the initial distribution forward through strategy and kernel.

    Returns T+1 distribution slices; slice t+1 is
    sum_{x,a} mu_t(x) * s_t(a|x) * p(x'|x,a). The decision table at the final
    epoch T is never applied to a transition.
    """
    if strategy.n_states != kernel.n_states or strategy.n_actions != kernel.n_actions:
        raise ValueError(
            f"strategy shape ({strategy.n_states} states, {strategy.n_actions} actions) "
            f"does not match kernel ({kernel.n_states} states, {kernel.n_actions} actions)"
        )
    init = as_float_array(initial, "initial distribution")
    if init.shape != (kernel.n_states,):
        raise ValueError(
            f"initial distribution has shape {init.shape}, expected ({kernel.n_states},)"
        )
    check_simplex(init, "initial distribution")

    dists = np.empty((strategy.horizon + 1, kernel.n_states))
    dists[0] = init
    for t in range(strategy.horizon):
        dists[t + 1] = np.einsum("x,xa,xay->y", dists[t], strategy.tables[t], kernel.probs)
    return Flow(dists)


def aggregate_strategy(
    mixed: MixedStrategy,
    strategies: Sequence[Strategy],
    flows: Sequence[Flow],
) -> Strategy:
    """Collapse a strategy mixture into one equivalent behavioral strategy.

    The action distribution at (t, x) is the member strategies' rows averaged
    with weights sigma_k * mu_t^k(x). States that no supported member visits
    at time t carry zero mass; their rows are defined as uniform, which keeps
    the result row-stochastic without affecting the induced flow.
    """
    if not (len(strategies) == len(flows) == len(mixed)):
        raise ValueError(
            f"mixture over {len(mixed)} strategies given {len(strategies)} strategies "
            f"and {len(flows)} flows"
        )
    if len(strategies) == 0:
        raise ValueError("cannot aggregate an empty strategy list")
    shape = strategies[0].tables.shape
    for k, (s, f) in enumerate(zip(strategies, flows)):
        if s.tables.shape != shape:
            raise ValueError(f"strategy {k} has shape {s.tables.shape}, expected {shape}")
        if f.dists.shape != shape[:2]:
            raise ValueError(f"flow {k} has shape {f.dists.shape}, expected {shape[:2]}")

    stacked_s = np.stack([s.tables for s in strategies])
    stacked_f = np.stack([f.dists for f in flows])
    num = np.einsum("k,ktx,ktxa->txa", mixed.weights, stacked_f, stacked_s)
    den = num.sum(axis=2)
    visited = den > 0.0
    safe = np.where(visited, den, 1.0)
    tables = num / safe[:, :, None]
    tables[~visited] = 1.0 / shape[2]
    return Strategy(tables)


__all__ = [
    "SIMPLEX_ATOL",
    "Topology",
    "StateSpace",
    "ActionSet",
    "TransitionKernel",
    "Strategy",
    "Flow",
    "MixedStrategy",
    "RewardModel",
    "CallableReward",
    "TabularMFG",
    "uniform_strategy",
    "random_strategy",
    "deterministic_strategy",
    "propagate_flow",
    "aggregate_strategy",
]
