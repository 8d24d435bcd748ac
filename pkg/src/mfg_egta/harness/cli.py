"""Command-line interface.

    mfg-egta solve <config.toml>
    mfg-egta exploitability <profile.json> <config.toml>
    mfg-egta chart <trace.csv> <out.svg>
    mfg-egta --version
"""

from __future__ import annotations

import argparse
import sys

from .. import __version__
from .chart import ChartError, render_chart
from .runner import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, exploitability_report, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfg-egta",
        description="Tabular mean-field-game experiments: fictitious play and iterative EGTA.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run the methods described by a config file")
    solve.add_argument("config", help="path to the experiment config (TOML)")

    expl = sub.add_parser("exploitability", help="recompute exploitability of a stored profile")
    expl.add_argument("profile", help="profile.json produced by solve")
    expl.add_argument("config", help="config describing the environment")

    chart = sub.add_parser("chart", help="render regret curves from a trace.csv")
    chart.add_argument("trace", help="trace.csv produced by solve")
    chart.add_argument("out", help="output SVG path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "solve":
        return run(args.config)
    if args.command == "exploitability":
        return exploitability_report(args.profile, args.config)
    if args.command == "chart":
        try:
            render_chart(args.trace, args.out)
        except ChartError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except OSError as exc:
            print(f"runtime error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        return EXIT_OK
    raise AssertionError(f"unhandled command {args.command!r}")


def run_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run_main()
