"""Tabular finite-horizon mean-field games: exact evaluation and best
responses, fictitious play, and iterative empirical-game (double-oracle)
equilibrium search, with benchmark environments and an experiment harness."""

__version__ = "0.1.0"

from .core import (
    ActionSet,
    CallableReward,
    Flow,
    MixedStrategy,
    RewardModel,
    StateSpace,
    Strategy,
    TabularMFG,
    Topology,
    TransitionKernel,
    aggregate_strategy,
    deterministic_strategy,
    propagate_flow,
    random_strategy,
    uniform_strategy,
)
from .environments import (
    BeachBar1DConfig,
    BeachBar2DConfig,
    ChasingConfig,
    build_beach_bar_1d,
    build_beach_bar_2d,
    build_chasing,
    build_custom,
)
from .response import (
    BestResponse,
    PopulationRegret,
    RegretReport,
    ValueTable,
    best_response,
    evaluate,
    evaluate_mixed,
    exploitability,
    payoff_matrix,
    value_table,
)
from .solvers import (
    EmpiricalGame,
    FictitiousPlay,
    FPConfig,
    IterativeEGTA,
    RestrictedFPResult,
    SolveRecord,
    SolveTrace,
    matrix_fp,
    restricted_fp,
)

__all__ = [
    "__version__",
    "ActionSet",
    "CallableReward",
    "Flow",
    "MixedStrategy",
    "RewardModel",
    "StateSpace",
    "Strategy",
    "TabularMFG",
    "Topology",
    "TransitionKernel",
    "aggregate_strategy",
    "deterministic_strategy",
    "propagate_flow",
    "random_strategy",
    "uniform_strategy",
    "BeachBar1DConfig",
    "BeachBar2DConfig",
    "ChasingConfig",
    "build_beach_bar_1d",
    "build_beach_bar_2d",
    "build_chasing",
    "build_custom",
    "BestResponse",
    "PopulationRegret",
    "RegretReport",
    "ValueTable",
    "best_response",
    "evaluate",
    "evaluate_mixed",
    "exploitability",
    "payoff_matrix",
    "value_table",
    "EmpiricalGame",
    "FictitiousPlay",
    "FPConfig",
    "IterativeEGTA",
    "RestrictedFPResult",
    "SolveRecord",
    "SolveTrace",
    "matrix_fp",
    "restricted_fp",
]
