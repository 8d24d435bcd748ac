"""Builders for the benchmark games: crowd-averse beach bars on 1-D and 2-D
tori, the three-population cyclic chasing game, and a generic constructor for
hand-specified tabular games.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import as_float_array
from .core import (
    ActionSet,
    CallableReward,
    RewardModel,
    StateSpace,
    TabularMFG,
    Topology,
    TransitionKernel,
)

# Floor applied inside every log(mu(x)) term: deterministic dynamics can
# drive state probabilities to exact zero, and the floor caps the
# crowd-aversion bonus at -log(1e-10) ~= 23 so payoffs stay finite.
MU_FLOOR = 1e-10

# Cyclic hens -> snakes -> foxes interaction payoffs R[i][j]: the reward a
# member of population i collects per unit of population j sharing its cell.
CHASING_PAYOFFS = (
    (0.0, -1.0, 1.0),
    (1.0, 0.0, -1.0),
    (-1.0, 1.0, 0.0),
)

BEACH_1D_ACTIONS = ActionSet(3, ("left", "stay", "right"))
BEACH_1D_MOVES = (-1, 0, 1)

BEACH_2D_ACTIONS = ActionSet(5, ("up", "down", "left", "right", "stay"))
BEACH_2D_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1), (0, 0))


@dataclass(frozen=True)
class BeachBar1DConfig:
    n_states: int
    horizon: int
    bar_position: int = 0
    noise_prob: float = 0.1
    move_cost_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n_states < 1:
            raise ValueError(f"n_states must be >= 1, got {self.n_states}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if not 0 <= self.bar_position < self.n_states:
            raise ValueError(
                f"bar_position {self.bar_position} outside state range [0, {self.n_states})"
            )
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ValueError(f"noise_prob must be in [0, 1], got {self.noise_prob}")


@dataclass(frozen=True)
class BeachBar2DConfig:
    width: int
    height: int
    horizon: int
    bar_position: tuple[int, int] = (0, 0)
    noise_prob: float = 0.1
    move_cost_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.width}x{self.height}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        row, col = self.bar_position
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise ValueError(
                f"bar_position {self.bar_position} outside the {self.height}x{self.width} grid"
            )
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ValueError(f"noise_prob must be in [0, 1], got {self.noise_prob}")


@dataclass(frozen=True)
class ChasingConfig:
    width: int = 5
    height: int = 5
    horizon: int = 10
    noise_prob: float = 0.1
    payoff_table: tuple = CHASING_PAYOFFS
    initial_dists: tuple | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.width}x{self.height}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ValueError(f"noise_prob must be in [0, 1], got {self.noise_prob}")
        table = np.asarray(self.payoff_table, dtype=np.float64)
        if table.shape != (3, 3):
            raise ValueError(f"payoff table must be 3x3, got shape {table.shape}")
        if np.any(np.diagonal(table) != 0.0):
            raise ValueError("payoff table must have a zero diagonal")


class CrowdAversionReward(RewardModel):
    """Beach-bar stage reward: closeness bonus minus move cost minus
    log-of-own-crowd at the current cell."""

    def __init__(self, closeness: np.ndarray, move_cost: np.ndarray):
        self._closeness = as_float_array(closeness, "closeness")
        self._move_cost = as_float_array(move_cost, "move cost")

    def stage_rewards(self, pop: int, mu_slice: np.ndarray) -> np.ndarray:
        if pop != 0:
            raise IndexError(f"single-population game, got population {pop}")
        crowd = np.log(np.maximum(mu_slice[0], MU_FLOOR))
        base = self._closeness - crowd
        return base[:, None] - self._move_cost[None, :]


class CyclicChasingReward(RewardModel):
    """Chasing stage reward: log-crowd aversion towards one's own population
    plus cell-wise cyclic interaction with the other populations."""

    def __init__(self, payoff_table: np.ndarray, n_actions: int):
        self._table = as_float_array(payoff_table, "payoff table")
        self._n_actions = n_actions

    def stage_rewards(self, pop: int, mu_slice: np.ndarray) -> np.ndarray:
        n_pops = self._table.shape[0]
        if not 0 <= pop < n_pops:
            raise IndexError(f"population index {pop} out of range for {n_pops} populations")
        own = -np.log(np.maximum(mu_slice[pop], MU_FLOOR))
        interaction = np.zeros_like(own)
        for j in range(n_pops):
            if j != pop:
                interaction = interaction + mu_slice[j] * self._table[pop, j]
        per_state = own + interaction
        return np.repeat(per_state[:, None], self._n_actions, axis=1)


def _torus_distance_1d(n: int, origin: int) -> np.ndarray:
    idx = np.arange(n)
    raw = np.abs(idx - origin)
    return np.minimum(raw, n - raw).astype(np.float64)


def _closeness_from_distance(dist: np.ndarray) -> np.ndarray:
    # Normalized so the bonus is 1 at the bar and exactly 0 at the antipode.
    d_max = float(dist.max())
    if d_max == 0.0:
        return np.ones_like(dist)
    return 1.0 - dist / d_max


def _kernel_1d(n_states: int, noise_prob: float) -> TransitionKernel:
    probs = np.zeros((n_states, 3, n_states))
    noise = ((-1, noise_prob / 2.0), (0, 1.0 - noise_prob), (1, noise_prob / 2.0))
    for a, move in enumerate(BEACH_1D_MOVES):
        for eps, w in noise:
            targets = (np.arange(n_states) + move + eps) % n_states
            np.add.at(probs[:, a, :], (np.arange(n_states), targets), w)
    return TransitionKernel(probs)


def _kernel_2d(width: int, height: int, noise_prob: float) -> TransitionKernel:
    n = width * height
    rows, cols = np.divmod(np.arange(n), width)

    def shift(dr: int, dc: int) -> np.ndarray:
        return ((rows + dr) % height) * width + (cols + dc) % width

    probs = np.zeros((n, 5, n))
    for a, (dr, dc) in enumerate(BEACH_2D_MOVES):
        np.add.at(probs[:, a, :], (np.arange(n), shift(dr, dc)), 1.0 - noise_prob)
        for er, ec in BEACH_2D_MOVES:
            np.add.at(probs[:, a, :], (np.arange(n), shift(er, ec)), noise_prob / 5.0)
    return TransitionKernel(probs)


def build_beach_bar_1d(cfg: BeachBar1DConfig) -> TabularMFG:
    """Single-population beach bar on a 1-D torus.

    Players move left/stay/right (environment noise may shift the move by one
    cell) and collect closeness-to-bar minus move cost |a|/|X| minus
    log-crowding. The population starts uniform.
    """
    n = cfg.n_states
    closeness = _closeness_from_distance(_torus_distance_1d(n, cfg.bar_position))
    move_cost = cfg.move_cost_scale * np.array([abs(m) for m in BEACH_1D_MOVES]) / n
    return TabularMFG(
        n_populations=1,
        state_space=StateSpace(n, Topology.TORUS_1D),
        action_set=BEACH_1D_ACTIONS,
        kernel=_kernel_1d(n, cfg.noise_prob),
        reward=CrowdAversionReward(closeness, move_cost),
        horizon=cfg.horizon,
        initial_dists=np.full((1, n), 1.0 / n),
    )


def build_beach_bar_2d(cfg: BeachBar2DConfig) -> TabularMFG:
    """Single-population beach bar on a width x height torus with five actions
    (stay plus the four axis moves); closeness uses torus Manhattan distance."""
    n = cfg.width * cfg.height
    rows, cols = np.divmod(np.arange(n), cfg.width)
    bar_row, bar_col = cfg.bar_position
    dr = np.abs(rows - bar_row)
    dc = np.abs(cols - bar_col)
    dist = np.minimum(dr, cfg.height - dr) + np.minimum(dc, cfg.width - dc)
    closeness = _closeness_from_distance(dist.astype(np.float64))
    amps = np.array([abs(r) + abs(c) for r, c in BEACH_2D_MOVES], dtype=np.float64)
    move_cost = cfg.move_cost_scale * amps / n
    return TabularMFG(
        n_populations=1,
        state_space=StateSpace(n, Topology.TORUS_2D, width=cfg.width, height=cfg.height),
        action_set=BEACH_2D_ACTIONS,
        kernel=_kernel_2d(cfg.width, cfg.height, cfg.noise_prob),
        reward=CrowdAversionReward(closeness, move_cost),
        horizon=cfg.horizon,
        initial_dists=np.full((1, n), 1.0 / n),
    )


def _quadrant_starts(width: int, height: int) -> np.ndarray:
    """Three uniform blocks: top-left, top-right and bottom-left quadrants.

    Identical starts would make all three flows coincide by symmetry and the
    cyclic interaction terms cancel to zero, degenerating the game.
    """
    bw = (width + 1) // 2
    bh = (height + 1) // 2
    n = width * height
    rows, cols = np.divmod(np.arange(n), width)
    blocks = [
        (rows < bh) & (cols < bw),
        (rows < bh) & (cols >= width - bw),
        (rows >= height - bh) & (cols < bw),
    ]
    dists = np.zeros((3, n))
    for i, mask in enumerate(blocks):
        dists[i, mask] = 1.0 / int(mask.sum())
    return dists


def build_chasing(cfg: ChasingConfig) -> TabularMFG:
    """Three populations chasing cyclically on a 2-D torus.

    Movement reuses the five-action torus kernel of the 2-D beach bar; the
    reward has no bar and no move cost, only crowd aversion plus the cell-wise
    cyclic interaction given by the payoff table.
    """
    n = cfg.width * cfg.height
    if cfg.initial_dists is not None:
        dists = as_float_array(cfg.initial_dists, "initial distributions")
        if dists.shape != (3, n):
            raise ValueError(f"initial distributions must have shape (3, {n}), got {dists.shape}")
    else:
        dists = _quadrant_starts(cfg.width, cfg.height)
    return TabularMFG(
        n_populations=3,
        state_space=StateSpace(n, Topology.TORUS_2D, width=cfg.width, height=cfg.height),
        action_set=BEACH_2D_ACTIONS,
        kernel=_kernel_2d(cfg.width, cfg.height, cfg.noise_prob),
        reward=CyclicChasingReward(np.asarray(cfg.payoff_table, dtype=np.float64), 5),
        horizon=cfg.horizon,
        initial_dists=dists,
    )


def build_custom(
    n_populations: int,
    kernel,
    reward,
    horizon: int,
    initial_dists,
    action_labels: Sequence[str] = (),
) -> TabularMFG:
    """Assemble a game from raw parts, validating every invariant.

    ``kernel`` may be a TransitionKernel or a raw (X, A, X) array; ``reward``
    may be a RewardModel or a scalar callable ``fn(pop, x, a, mu_slice)``.
    """
    if not isinstance(kernel, TransitionKernel):
        kernel = TransitionKernel(kernel)
    if not isinstance(reward, RewardModel):
        if not callable(reward):
            raise TypeError("reward must be a RewardModel or a callable")
        reward = CallableReward(reward, kernel.n_states, kernel.n_actions)
    return TabularMFG(
        n_populations=n_populations,
        state_space=StateSpace(kernel.n_states),
        action_set=ActionSet(kernel.n_actions, tuple(action_labels)),
        kernel=kernel,
        reward=reward,
        horizon=horizon,
        initial_dists=initial_dists,
    )


__all__ = [
    "MU_FLOOR",
    "CHASING_PAYOFFS",
    "BEACH_1D_ACTIONS",
    "BEACH_1D_MOVES",
    "BEACH_2D_ACTIONS",
    "BEACH_2D_MOVES",
    "BeachBar1DConfig",
    "BeachBar2DConfig",
    "ChasingConfig",
    "CrowdAversionReward",
    "CyclicChasingReward",
    "build_beach_bar_1d",
    "build_beach_bar_2d",
    "build_chasing",
    "build_custom",
]
