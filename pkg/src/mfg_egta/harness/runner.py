"""Experiment runner: builds the configured game, runs each requested method
with the shared seed, and persists trace.csv, profile.json and chart.svg.

trace.csv has header ``method,iteration,pop,regret,total_regret,br_count,elapsed_s``
with one row per population per record point for multi-population games plus
a ``pop=all`` total row (single-population games emit just the total row).
Floats are written with 9 significant digits; ``elapsed_s`` is the only
non-deterministic column. profile.json stores the final mixtures and their
supporting strategy tables with full round-trip precision.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..core import MixedStrategy, Strategy, TabularMFG
from ..response import exploitability
from ..solvers import EmpiricalGame, FictitiousPlay, IterativeEGTA, SolveTrace
from .config import ConfigError, ExperimentConfig, build_environment, load_config
from .chart import render_chart

TRACE_HEADER = ("method", "iteration", "pop", "regret", "total_regret", "br_count", "elapsed_s")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

PROFILE_FORMAT_VERSION = 1


def _fmt(value: float) -> str:
    return format(float(value), ".9g")


def _fit_method(method: str, cfg: ExperimentConfig, game: TabularMFG):
    if method == "egta":
        solver = IterativeEGTA(
            n_outer_iterations=cfg.outer_iters,
            max_inner_iters=cfg.max_inner_iters,
            inner_stop_tol=cfg.inner_stop_tol,
            deviation_tol=cfg.deviation_tol,
            seed=cfg.seed,
            initial=cfg.initial,
            parallel=cfg.parallel,
        )
    elif method == "fp":
        solver = FictitiousPlay(
            n_iterations=cfg.fp_iters,
            record_every=cfg.record_every,
            seed=cfg.seed,
            initial=cfg.initial,
            parallel=cfg.parallel,
        )
    else:  # pragma: no cover - guarded by config validation
        raise ConfigError(f"unknown method {method!r}")
    return solver.fit(game)


def trace_rows(method: str, trace: SolveTrace, n_populations: int) -> list[list[str]]:
    rows = []
    for rec in trace.rows:
        if n_populations > 1:
            for i in range(n_populations):
                rows.append(
                    [
                        method,
                        str(rec.iteration),
                        str(i),
                        _fmt(rec.regrets[i]),
                        _fmt(rec.total_regret),
                        str(rec.br_count),
                        _fmt(rec.elapsed_s),
                    ]
                )
        rows.append(
            [
                method,
                str(rec.iteration),
                "all",
                _fmt(rec.total_regret),
                _fmt(rec.total_regret),
                str(rec.br_count),
                _fmt(rec.elapsed_s),
            ]
        )
    return rows


def _profile_entry(method: str, fitted) -> dict:
    if method == "egta":
        populations = [
            {
                "weights": fitted.mixtures_[i].weights.tolist(),
                "strategies": [s.tables.tolist() for s in fitted.support_strategies_[i]],
            }
            for i in range(len(fitted.mixtures_))
        ]
        certificate = dict(fitted.certificate_)
    else:
        populations = [
            {
                "weights": fitted.mixtures_[i].weights.tolist(),
                "strategies": [s.tables.tolist() for s in fitted.strategies_[i]],
            }
            for i in range(len(fitted.mixtures_))
        ]
        certificate = None
    last = fitted.trace_.rows[-1]
    return {
        "populations": populations,
        "certificate": certificate,
        "exploitability_eval": "pre_expansion",
        "final_total_regret": last.total_regret,
        "final_iteration": last.iteration,
        "best_responses": fitted.n_best_responses_,
    }


def run(config_path, stdout=None, stderr=None) -> int:
    """Execute the experiment described by ``config_path``.

    Returns 0 on success, 2 on configuration errors, 3 on runtime failures.
    Partially written outputs are removed on failure.
    """
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG

    out_dir = Path(cfg.output_dir)
    written: list[Path] = []
    try:
        game = build_environment(cfg.env)
        out_dir.mkdir(parents=True, exist_ok=True)

        all_rows: list[list[str]] = []
        profile_methods = {}
        for method in cfg.methods:
            fitted = _fit_method(method, cfg, game)
            all_rows.extend(trace_rows(method, fitted.trace_, game.n_populations))
            profile_methods[method] = _profile_entry(method, fitted)

        trace_path = out_dir / "trace.csv"
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_HEADER)
            writer.writerows(all_rows)
        written.append(trace_path)

        profile = {
            "format_version": PROFILE_FORMAT_VERSION,
            "package_version": __version__,
            "config": {
                "seed": cfg.seed,
                "methods": list(cfg.methods),
                "outer_iters": cfg.outer_iters,
                "fp_iters": cfg.fp_iters,
                "record_every": cfg.record_every,
                "max_inner_iters": cfg.max_inner_iters,
                "inner_stop_tol": cfg.inner_stop_tol,
                "deviation_tol": cfg.deviation_tol,
                "initial": cfg.initial,
                "parallel": cfg.parallel,
                "env": cfg.env,
            },
            "methods": profile_methods,
        }
        profile_path = out_dir / "profile.json"
        with open(profile_path, "w") as fh:
            json.dump(profile, fh, indent=2)
            fh.write("\n")
        written.append(profile_path)

        chart_path = out_dir / "chart.svg"
        render_chart(trace_path, chart_path)
        written.append(chart_path)
    except Exception as exc:  # noqa: BLE001 - boundary: report and clean up
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        print(f"runtime error: {exc}", file=err)
        return EXIT_RUNTIME

    print(f"wrote {', '.join(str(p) for p in written)}", file=out)
    return EXIT_OK


def _load_profile_populations(entry: dict, game: TabularMFG):
    mixtures = []
    sets = []
    for i, pop in enumerate(entry["populations"]):
        strategies = [Strategy(np.asarray(t, dtype=np.float64)) for t in pop["strategies"]]
        expected = (game.horizon + 1, game.n_states, game.n_actions)
        for s in strategies:
            if s.tables.shape != expected:
                raise ValueError(
                    f"population {i} strategy has shape {s.tables.shape}, "
                    f"environment expects {expected}"
                )
        mixtures.append(MixedStrategy(np.asarray(pop["weights"], dtype=np.float64)))
        if len(mixtures[-1]) != len(strategies):
            raise ValueError(
                f"population {i} has {len(strategies)} strategies but "
                f"{len(mixtures[-1])} weights"
            )
        sets.append(strategies)
    if len(sets) != game.n_populations:
        raise ValueError(
            f"profile holds {len(sets)} populations, environment has {game.n_populations}"
        )
    return mixtures, sets


def exploitability_report(profile_path, config_path, stdout=None, stderr=None) -> int:
    """Recompute exploitability of persisted profiles against the configured
    environment and print per-population and total regrets (9 decimals)."""
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        cfg = load_config(config_path)
        game = build_environment(cfg.env)
        with open(profile_path) as fh:
            profile = json.load(fh)
        methods = profile["methods"]
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: cannot load profile {profile_path}: {exc}", file=err)
        return EXIT_CONFIG

    try:
        reports = []
        for method, entry in methods.items():
            mixtures, sets = _load_profile_populations(entry, game)
            empirical = EmpiricalGame(game, sets)
            reports.append((method, exploitability(mixtures, empirical, game, cfg.parallel)))
    except (ValueError, KeyError, TypeError) as exc:
        print(f"config error: profile does not match environment: {exc}", file=err)
        return EXIT_CONFIG

    for method, report in reports:
        print(f"method {method}", file=out)
        for i, entry in enumerate(report.per_population):
            print(
                f"  population {i}: best_response={entry.best_response_value:.9f} "
                f"current={entry.current_value:.9f} regret={entry.regret:.9f}",
                file=out,
            )
        print(f"  total: {report.total:.9f}", file=out)
    return EXIT_OK
