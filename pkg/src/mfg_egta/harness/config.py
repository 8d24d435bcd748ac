"""Experiment configuration: a flat TOML file with typed scalar keys and a
single nested ``[env]`` table selecting the game.

Top-level keys (defaults in parentheses):

    seed            integer, required — no wall-clock fallback
    methods         array from {"egta", "fp"}, no duplicates (["egta", "fp"])
    outer_iters     EGTA outer iterations (30)
    fp_iters        fictitious-play iterations (100)
    record_every    trace recording stride for fp (1)
    max_inner_iters empirical-game FP iteration cap (200)
    inner_stop_tol  empirical-game FP weight-change stop threshold (1e-4)
    deviation_tol   EGTA no-deviation stopping tolerance (1e-9)
    initial         "random" | "uniform" initial strategy ("random")
    parallel        per-population thread fan-out (true)
    output_dir      where trace.csv / profile.json / chart.svg land ("out")

``[env]`` needs ``kind`` in {beach1d, beach2d, chasing, custom}; the other
keys mirror the corresponding builder's config fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..core import TabularMFG
from ..environments import (
    BeachBar1DConfig,
    BeachBar2DConfig,
    ChasingConfig,
    build_beach_bar_1d,
    build_beach_bar_2d,
    build_chasing,
    build_custom,
)

VALID_METHODS = ("egta", "fp")
VALID_KINDS = ("beach1d", "beach2d", "chasing", "custom")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    env: dict = field(default_factory=dict)
    methods: tuple[str, ...] = ("egta", "fp")
    outer_iters: int = 30
    fp_iters: int = 100
    record_every: int = 1
    max_inner_iters: int = 200
    inner_stop_tol: float = 1e-4
    deviation_tol: float = 1e-9
    initial: str = "random"
    parallel: bool = True
    output_dir: str = "out"


def _require(table: dict, key: str, kinds, where: str):
    if key not in table:
        raise ConfigError(f"missing required field '{where}{key}'")
    return _typed(table, key, kinds, where)


def _typed(table: dict, key: str, kinds, where: str, default=None):
    if key not in table:
        return default
    value = table[key]
    if isinstance(value, bool) and bool not in kinds:
        raise ConfigError(f"field '{where}{key}' has wrong type bool")
    if kinds == (float,) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, kinds):
        names = "/".join(k.__name__ for k in kinds)
        raise ConfigError(
            f"field '{where}{key}' must be {names}, got {type(value).__name__}"
        )
    return value


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment config file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config file {path} does not parse: {exc}") from exc
    return parse_config(data)


def parse_config(data: dict) -> ExperimentConfig:
    known = {
        "seed",
        "env",
        "methods",
        "outer_iters",
        "fp_iters",
        "record_every",
        "max_inner_iters",
        "inner_stop_tol",
        "deviation_tol",
        "initial",
        "parallel",
        "output_dir",
    }
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown field '{key}'")

    seed = _require(data, "seed", (int,), "")

    methods_raw = _typed(data, "methods", (list,), "", default=list(VALID_METHODS))
    methods = []
    for m in methods_raw:
        if m not in VALID_METHODS:
            raise ConfigError(f"field 'methods' contains unknown method {m!r}")
        if m in methods:
            raise ConfigError(f"field 'methods' lists {m!r} twice")
        methods.append(m)
    if not methods:
        raise ConfigError("field 'methods' must name at least one method")

    env = _require(data, "env", (dict,), "")
    kind = _require(env, "kind", (str,), "env.")
    if kind not in VALID_KINDS:
        raise ConfigError(f"field 'env.kind' must be one of {VALID_KINDS}, got {kind!r}")

    cfg = ExperimentConfig(
        seed=seed,
        env=dict(env),
        methods=tuple(methods),
        outer_iters=_typed(data, "outer_iters", (int,), "", default=30),
        fp_iters=_typed(data, "fp_iters", (int,), "", default=100),
        record_every=_typed(data, "record_every", (int,), "", default=1),
        max_inner_iters=_typed(data, "max_inner_iters", (int,), "", default=200),
        inner_stop_tol=_typed(data, "inner_stop_tol", (float,), "", default=1e-4),
        deviation_tol=_typed(data, "deviation_tol", (float,), "", default=1e-9),
        initial=_typed(data, "initial", (str,), "", default="random"),
        parallel=_typed(data, "parallel", (bool,), "", default=True),
        output_dir=_typed(data, "output_dir", (str,), "", default="out"),
    )
    for name, value in (
        ("outer_iters", cfg.outer_iters),
        ("fp_iters", cfg.fp_iters),
        ("record_every", cfg.record_every),
        ("max_inner_iters", cfg.max_inner_iters),
    ):
        if value < 1:
            raise ConfigError(f"field '{name}' must be >= 1, got {value}")
    if cfg.inner_stop_tol <= 0:
        raise ConfigError(f"field 'inner_stop_tol' must be positive, got {cfg.inner_stop_tol}")
    if cfg.deviation_tol < 0:
        raise ConfigError(f"field 'deviation_tol' must be >= 0, got {cfg.deviation_tol}")
    if cfg.initial not in ("random", "uniform"):
        raise ConfigError(f"field 'initial' must be 'random' or 'uniform', got {cfg.initial!r}")
    build_environment(cfg.env)  # fail on env problems at parse time
    return cfg


def _env_fields(env: dict, allowed: set[str]) -> None:
    for key in env:
        if key != "kind" and key not in allowed:
            raise ConfigError(f"unknown field 'env.{key}' for env.kind {env['kind']!r}")


def build_environment(env: dict) -> TabularMFG:
    """Construct the game described by a validated ``[env]`` table."""
    kind = env.get("kind")
    try:
        if kind == "beach1d":
            _env_fields(env, {"n_states", "horizon", "bar_position", "noise_prob", "move_cost_scale"})
            cfg = BeachBar1DConfig(
                n_states=_require(env, "n_states", (int,), "env."),
                horizon=_require(env, "horizon", (int,), "env."),
                bar_position=_typed(env, "bar_position", (int,), "env.", default=0),
                noise_prob=_typed(env, "noise_prob", (float,), "env.", default=0.1),
                move_cost_scale=_typed(env, "move_cost_scale", (float,), "env.", default=1.0),
            )
            return build_beach_bar_1d(cfg)
        if kind == "beach2d":
            _env_fields(env, {"width", "height", "horizon", "bar_position", "noise_prob", "move_cost_scale"})
            bar = _typed(env, "bar_position", (list,), "env.", default=[0, 0])
            if len(bar) != 2 or not all(isinstance(v, int) for v in bar):
                raise ConfigError("field 'env.bar_position' must be [row, col] integers")
            cfg = BeachBar2DConfig(
                width=_require(env, "width", (int,), "env."),
                height=_require(env, "height", (int,), "env."),
                horizon=_require(env, "horizon", (int,), "env."),
                bar_position=(bar[0], bar[1]),
                noise_prob=_typed(env, "noise_prob", (float,), "env.", default=0.1),
                move_cost_scale=_typed(env, "move_cost_scale", (float,), "env.", default=1.0),
            )
            return build_beach_bar_2d(cfg)
        if kind == "chasing":
            _env_fields(env, {"width", "height", "horizon", "noise_prob", "payoff_table", "initial_dists"})
            kwargs: dict[str, Any] = {}
            if "payoff_table" in env:
                kwargs["payoff_table"] = tuple(tuple(row) for row in env["payoff_table"])
            if "initial_dists" in env:
                kwargs["initial_dists"] = tuple(tuple(row) for row in env["initial_dists"])
            cfg = ChasingConfig(
                width=_typed(env, "width", (int,), "env.", default=5),
                height=_typed(env, "height", (int,), "env.", default=5),
                horizon=_typed(env, "horizon", (int,), "env.", default=10),
                noise_prob=_typed(env, "noise_prob", (float,), "env.", default=0.1),
                **kwargs,
            )
            return build_chasing(cfg)
        if kind == "custom":
            _env_fields(env, {"n_populations", "horizon", "kernel", "rewards", "initial_dists"})
            n_pops = _require(env, "n_populations", (int,), "env.")
            rewards = _require(env, "rewards", (list,), "env.")
            if len(rewards) != n_pops:
                raise ConfigError(
                    f"field 'env.rewards' must hold one (states x actions) table per "
                    f"population, got {len(rewards)} for {n_pops}"
                )

            def tabular_reward(pop, x, a, mu_slice):
                return float(rewards[pop][x][a])

            return build_custom(
                n_populations=n_pops,
                kernel=_require(env, "kernel", (list,), "env."),
                reward=tabular_reward,
                horizon=_require(env, "horizon", (int,), "env."),
                initial_dists=_require(env, "initial_dists", (list,), "env."),
            )
    except ConfigError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"invalid 'env' block: {exc}") from exc
    raise ConfigError(f"field 'env.kind' must be one of {VALID_KINDS}, got {kind!r}")
