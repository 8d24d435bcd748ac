"""Equilibrium solvers.

Two estimator-style entry points cover the full game:

* :class:`FictitiousPlay` — classic fictitious play: best respond to the flow
  of the running average strategy, average the best response in.
* :class:`IterativeEGTA` — the double-oracle loop: solve the current
  empirical game (restricted strategy sets) with fictitious play, expand each
  population's set with an unconstrained best response, stop once no
  deviation gains more than the tolerance.

Both follow the scikit-learn convention: hyperparameters in ``__init__``,
``fit(game)`` runs the solve, results land in trailing-underscore
attributes. The module-level functions :func:`restricted_fp` (the
empirical-game subroutine) and :func:`matrix_fp` (a plain matrix-game
helper) are reusable on their own.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._parallel import population_map
from ._validation import as_float_array
from .core import (
    Flow,
    MixedStrategy,
    Strategy,
    TabularMFG,
    aggregate_strategy,
    propagate_flow,
    random_strategy,
    uniform_strategy,
)
from .response import (
    RegretReport,
    _stacked_values,
    best_response,
    evaluate_mixed,
)

# Two strategies whose tables differ by at most this sup-norm are treated as
# the same strategy when expanding an empirical game.
DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class FPConfig:
    """Inner-loop fictitious play budget: hard iteration cap and the sup-norm
    threshold on mixture-weight change below which the loop stops."""

    max_inner_iters: int = 200
    stop_tol: float = 1e-4

    def __post_init__(self) -> None:
        if self.max_inner_iters < 1:
            raise ValueError(f"max_inner_iters must be >= 1, got {self.max_inner_iters}")
        if self.stop_tol <= 0.0:
            raise ValueError(f"stop_tol must be positive, got {self.stop_tol}")


class EmpiricalGame:
    """Restricted strategy sets with cached induced flows and best-response
    counts, one list per population.

    Flows are computed on insertion, so the cache is coherent by
    construction. The object is mutated only between solver iterations by a
    single owner; readers receive tuples.
    """

    def __init__(self, game: TabularMFG, strategies_per_pop: Sequence[Sequence[Strategy]]):
        if len(strategies_per_pop) != game.n_populations:
            raise ValueError(
                f"got strategy sets for {len(strategies_per_pop)} populations, "
                f"game has {game.n_populations}"
            )
        self._game = game
        self._strategies: list[list[Strategy]] = [[] for _ in range(game.n_populations)]
        self._flows: list[list[Flow]] = [[] for _ in range(game.n_populations)]
        self._counts: list[list[int]] = [[] for _ in range(game.n_populations)]
        for i, strategies in enumerate(strategies_per_pop):
            for strategy in strategies:
                self.add(i, strategy)

    @property
    def game(self) -> TabularMFG:
        return self._game

    @property
    def n_populations(self) -> int:
        return self._game.n_populations

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self._strategies)

    def strategies(self, pop: int) -> tuple[Strategy, ...]:
        return tuple(self._strategies[pop])

    def flows(self, pop: int) -> tuple[Flow, ...]:
        return tuple(self._flows[pop])

    def counts(self, pop: int) -> tuple[int, ...]:
        return tuple(self._counts[pop])

    def add(self, pop: int, strategy: Strategy) -> None:
        expected = (self._game.horizon + 1, self._game.n_states, self._game.n_actions)
        if strategy.tables.shape != expected:
            raise ValueError(
                f"strategy has shape {strategy.tables.shape}, expected {expected}"
            )
        flow = propagate_flow(strategy, self._game.initial_dists[pop], self._game.kernel)
        self._strategies[pop].append(strategy)
        self._flows[pop].append(flow)
        self._counts[pop].append(0)

    def contains(self, pop: int, strategy: Strategy, tol: float = DEDUP_TOL) -> bool:
        return any(
            float(np.max(np.abs(existing.tables - strategy.tables))) <= tol
            for existing in self._strategies[pop]
        )

    def reset_counts(self) -> None:
        for counts in self._counts:
            counts[:] = [0] * len(counts)

    def record_best_response(self, pop: int, index: int) -> None:
        self._counts[pop][index] += 1


@dataclass(frozen=True)
class SolveRecord:
    """One recorded point of a solve: per-population regrets at that
    iteration, their sum, cumulative best responses computed so far, inner
    iterations used (empirical-game solves only) and wall-clock seconds."""

    iteration: int
    regrets: tuple[float, ...]
    total_regret: float
    br_count: int
    inner_iterations: int | None
    elapsed_s: float


@dataclass(frozen=True)
class SolveTrace:
    rows: tuple[SolveRecord, ...]

    def __post_init__(self) -> None:
        last = 0
        for row in self.rows:
            if row.iteration <= last:
                raise ValueError(
                    f"trace iterations must strictly increase from 1, got "
                    f"{row.iteration} after {last}"
                )
            last = row.iteration

    def totals(self) -> np.ndarray:
        return np.array([row.total_regret for row in self.rows])

    def iterations(self) -> np.ndarray:
        return np.array([row.iteration for row in self.rows], dtype=int)


class RestrictedFPResult(NamedTuple):
    mixtures: list[MixedStrategy]
    flows: list[Flow]
    iterations: int


def _induced_flows(
    empirical: EmpiricalGame, weights: list[np.ndarray], game: TabularMFG
) -> list[Flow]:
    flows = []
    for i in range(game.n_populations):
        merged = aggregate_strategy(
            MixedStrategy(weights[i]), empirical.strategies(i), empirical.flows(i)
        )
        flows.append(propagate_flow(merged, game.initial_dists[i], game.kernel))
    return flows


def restricted_fp(
    empirical: EmpiricalGame,
    game: TabularMFG,
    config: FPConfig | None = None,
    parallel: bool = False,
) -> RestrictedFPResult:
    """Fictitious play over the empirical game's restricted strategy sets.

    Starts from the uniform mixture over each set. Every iteration best
    responds within the set to the flows induced by the current mixtures
    (ties to the lowest index), bumps that strategy's count, and re-averages
    with weights (1 + count_k) / (set size + total count) — i.e. every
    strategy carries one pseudo-count, matching the uniform start. Stops at
    the iteration cap or when no population's weights moved by more than
    ``stop_tol`` in sup norm.

    Returns the final mixtures, the flows they induce, and the number of
    iterations used.
    """
    cfg = config or FPConfig()
    n_pops = game.n_populations
    sizes = empirical.sizes()
    if any(k == 0 for k in sizes):
        raise ValueError(f"every population needs a non-empty strategy set, sizes {sizes}")

    empirical.reset_counts()
    stacks = [np.stack([s.tables for s in empirical.strategies(i)]) for i in range(n_pops)]
    weights = [np.full(k, 1.0 / k) for k in sizes]
    flows = _induced_flows(empirical, weights, game)
    iterations = 0

    for j in range(1, cfg.max_inner_iters + 1):
        iterations = j
        picks = population_map(
            lambda i: int(np.argmax(_stacked_values(stacks[i], flows, i, game))),
            n_pops,
            parallel,
        )
        delta = 0.0
        for i in range(n_pops):
            empirical.record_best_response(i, picks[i])
            counts = np.asarray(empirical.counts(i), dtype=np.float64)
            new_weights = (1.0 + counts) / (sizes[i] + j)
            delta = max(delta, float(np.max(np.abs(new_weights - weights[i]))))
            weights[i] = new_weights
        flows = _induced_flows(empirical, weights, game)
        if delta < cfg.stop_tol:
            break

    return RestrictedFPResult([MixedStrategy(w) for w in weights], flows, iterations)


def matrix_fp(matrix, iterations: int) -> MixedStrategy:
    """Fictitious play on an explicit symmetric payoff matrix.

    The row player best responds to the column mixture, which is the running
    empirical mixture itself (uniform before the first step). Ties split the
    count equally among maximizing rows, so symmetric indifference is
    preserved instead of collapsing to the lowest index.
    """
    m = as_float_array(matrix, "payoff matrix")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"payoff matrix must be square, got shape {m.shape}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    n = m.shape[0]
    counts = np.zeros(n)
    mixture = np.full(n, 1.0 / n)
    for _ in range(iterations):
        payoffs = m @ mixture
        best = np.flatnonzero(payoffs == payoffs.max())
        counts[best] += 1.0 / len(best)
        mixture = counts / counts.sum()
    return MixedStrategy(mixture)


def _initial_strategies(game, initial, initial_strategies, seed) -> list[Strategy]:
    if initial_strategies is not None:
        provided = list(initial_strategies)
        if len(provided) != game.n_populations:
            raise ValueError(
                f"got {len(provided)} initial strategies for {game.n_populations} populations"
            )
        return provided
    if initial == "uniform":
        policy = uniform_strategy(game.horizon, game.n_states, game.n_actions)
        return [policy] * game.n_populations
    if initial == "random":
        rng = np.random.default_rng(seed)
        return [
            random_strategy(rng, game.horizon, game.n_states, game.n_actions)
            for _ in range(game.n_populations)
        ]
    raise ValueError(f"initial must be 'random' or 'uniform', got {initial!r}")


def _check_game(game) -> TabularMFG:
    if not isinstance(game, TabularMFG):
        raise TypeError(f"expected a TabularMFG, got {type(game).__name__}")
    return game


class FictitiousPlay(BaseEstimator):
    """Full-game fictitious play baseline.

    Parameters
    ----------
    n_iterations : number of best-response/averaging steps.
    record_every : record a trace row every this many iterations (the final
        iteration is always recorded).
    seed : seeds the initial strategy when ``initial='random'``.
    initial : 'random' draws a row-stochastic strategy per population,
        'uniform' uses the uniform policy.
    initial_strategies : explicit per-population initial strategies,
        overriding ``initial``.
    parallel : fan per-population best responses out to threads
        (never changes numeric output).

    Attributes (after ``fit``)
    --------------------------
    strategies_ : per population, the list of generated best responses.
    mixtures_ : uniform mixture over each population's generated list.
    flows_ : flows induced by the final average strategies.
    trace_ : :class:`SolveTrace`; row at iteration j holds the regret of the
        average over the first j best responses.
    n_best_responses_ : total best-response computations performed.
    """

    def __init__(
        self,
        n_iterations: int = 100,
        record_every: int = 1,
        seed: int = 0,
        initial: str = "random",
        initial_strategies=None,
        parallel: bool = True,
    ):
        self.n_iterations = n_iterations
        self.record_every = record_every
        self.seed = seed
        self.initial = initial
        self.initial_strategies = initial_strategies
        self.parallel = parallel

    def fit(self, game: TabularMFG) -> "FictitiousPlay":
        game = _check_game(game)
        if self.n_iterations < 1:
            raise ValueError(f"n_iterations must be >= 1, got {self.n_iterations}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        start = time.monotonic()
        n_pops = game.n_populations

        starters = _initial_strategies(game, self.initial, self.initial_strategies, self.seed)
        flows = [
            propagate_flow(starters[i], game.initial_dists[i], game.kernel)
            for i in range(n_pops)
        ]
        generated: list[list[Strategy]] = [[] for _ in range(n_pops)]
        member_flows: list[list[Flow]] = [[] for _ in range(n_pops)]

        responses = population_map(lambda i: best_response(flows, i, game), n_pops, self.parallel)
        br_count = n_pops
        records = []

        for j in range(1, self.n_iterations + 1):
            for i in range(n_pops):
                generated[i].append(responses[i].strategy)
                member_flows[i].append(
                    propagate_flow(responses[i].strategy, game.initial_dists[i], game.kernel)
                )
            mixtures = [MixedStrategy.uniform(j) for _ in range(n_pops)]
            flows = []
            for i in range(n_pops):
                merged = aggregate_strategy(mixtures[i], generated[i], member_flows[i])
                flows.append(propagate_flow(merged, game.initial_dists[i], game.kernel))

            # The next step's best responses double as the exploitability
            # measurement of the just-updated average.
            responses = population_map(
                lambda i: best_response(flows, i, game), n_pops, self.parallel
            )
            br_count += n_pops

            if j % self.record_every == 0 or j == self.n_iterations:
                report = RegretReport.from_values(
                    [
                        (
                            responses[i].value,
                            evaluate_mixed(mixtures[i], generated[i], flows, i, game),
                        )
                        for i in range(n_pops)
                    ]
                )
                records.append(
                    SolveRecord(
                        iteration=j,
                        regrets=tuple(e.regret for e in report.per_population),
                        total_regret=report.total,
                        br_count=br_count,
                        inner_iterations=None,
                        elapsed_s=time.monotonic() - start,
                    )
                )

        self.strategies_ = [tuple(s) for s in generated]
        self.mixtures_ = [MixedStrategy.uniform(self.n_iterations) for _ in range(n_pops)]
        self.flows_ = flows
        self.trace_ = SolveTrace(tuple(records))
        self.n_best_responses_ = br_count
        return self


class IterativeEGTA(BaseEstimator):
    """Double-oracle equilibrium search with a fictitious-play inner loop.

    Each outer iteration solves the current empirical game with
    :func:`restricted_fp`, measures every population's gain from an
    unconstrained best response to the solution's flows, and either stops —
    when no gain exceeds ``deviation_tol``, certifying the profile as an
    eps-equilibrium of the full game — or adds the best responses to the
    restricted sets (skipping near-duplicates).

    Exploitability is recorded at the pre-expansion solution of every outer
    iteration.

    Attributes (after ``fit``)
    --------------------------
    mixtures_ : final per-population mixtures over ``support_strategies_``.
    support_strategies_ : the restricted sets the final mixtures live on.
    flows_ : flows induced by the final mixtures.
    empirical_game_ : the full grown :class:`EmpiricalGame` (may extend the
        support by the final expansion).
    certificate_ : dict with ``terminated_by_no_deviation``, ``epsilon`` and
        ``outer_iterations``.
    trace_ : :class:`SolveTrace` with one row per outer iteration.
    """

    def __init__(
        self,
        n_outer_iterations: int = 30,
        max_inner_iters: int = 200,
        inner_stop_tol: float = 1e-4,
        deviation_tol: float = 1e-9,
        seed: int = 0,
        initial: str = "random",
        initial_strategies=None,
        dedup_tol: float = DEDUP_TOL,
        parallel: bool = True,
    ):
        self.n_outer_iterations = n_outer_iterations
        self.max_inner_iters = max_inner_iters
        self.inner_stop_tol = inner_stop_tol
        self.deviation_tol = deviation_tol
        self.seed = seed
        self.initial = initial
        self.initial_strategies = initial_strategies
        self.dedup_tol = dedup_tol
        self.parallel = parallel

    def fit(self, game: TabularMFG) -> "IterativeEGTA":
        game = _check_game(game)
        if self.n_outer_iterations < 1:
            raise ValueError(
                f"n_outer_iterations must be >= 1, got {self.n_outer_iterations}"
            )
        if self.deviation_tol < 0.0:
            raise ValueError(f"deviation_tol must be >= 0, got {self.deviation_tol}")
        inner_cfg = FPConfig(self.max_inner_iters, self.inner_stop_tol)
        start = time.monotonic()
        n_pops = game.n_populations

        starters = _initial_strategies(game, self.initial, self.initial_strategies, self.seed)
        empirical = EmpiricalGame(game, [[s] for s in starters])

        records = []
        br_count = 0
        terminated = False
        outer_done = 0

        for tau in range(1, self.n_outer_iterations + 1):
            outer_done = tau
            solution = restricted_fp(empirical, game, inner_cfg, self.parallel)
            support = [empirical.strategies(i) for i in range(n_pops)]

            responses = population_map(
                lambda i: best_response(solution.flows, i, game), n_pops, self.parallel
            )
            br_count += n_pops
            report = RegretReport.from_values(
                [
                    (
                        responses[i].value,
                        evaluate_mixed(
                            solution.mixtures[i], support[i], solution.flows, i, game
                        ),
                    )
                    for i in range(n_pops)
                ]
            )
            records.append(
                SolveRecord(
                    iteration=tau,
                    regrets=tuple(e.regret for e in report.per_population),
                    total_regret=report.total,
                    br_count=br_count,
                    inner_iterations=solution.iterations,
                    elapsed_s=time.monotonic() - start,
                )
            )

            self.mixtures_ = solution.mixtures
            self.flows_ = solution.flows
            self.support_strategies_ = support

            gains = [e.best_response_value - e.current_value for e in report.per_population]
            if max(gains) <= self.deviation_tol:
                terminated = True
                break
            for i in range(n_pops):
                if not empirical.contains(i, responses[i].strategy, self.dedup_tol):
                    empirical.add(i, responses[i].strategy)

        self.empirical_game_ = empirical
        self.trace_ = SolveTrace(tuple(records))
        self.certificate_ = {
            "terminated_by_no_deviation": terminated,
            "epsilon": self.deviation_tol,
            "outer_iterations": outer_done,
        }
        self.n_best_responses_ = br_count
        return self


__all__ = [
    "DEDUP_TOL",
    "FPConfig",
    "EmpiricalGame",
    "SolveRecord",
    "SolveTrace",
    "RestrictedFPResult",
    "restricted_fp",
    "matrix_fp",
    "FictitiousPlay",
    "IterativeEGTA",
]
