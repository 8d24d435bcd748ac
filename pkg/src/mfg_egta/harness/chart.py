"""Deterministic SVG regret-curve rendering from a trace.csv.

The chart is built by direct string assembly (no plotting library) so that
identical input bytes always produce identical output bytes.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

WIDTH = 720
HEIGHT = 480
MARGIN_LEFT = 80
MARGIN_RIGHT = 150
MARGIN_TOP = 40
MARGIN_BOTTOM = 60

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

REQUIRED_COLUMNS = ("method", "iteration", "pop", "total_regret")


class ChartError(ValueError):
    """The trace file cannot be charted."""


def _read_series(trace_path) -> dict[str, list[tuple[int, float]]]:
    series: dict[str, list[tuple[int, float]]] = {}
    try:
        with open(trace_path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise ChartError(f"trace is missing columns {missing}")
            for line, row in enumerate(reader, start=2):
                if row.get("pop") != "all":
                    continue
                try:
                    point = (int(row["iteration"]), float(row["total_regret"]))
                except (TypeError, ValueError) as exc:
                    raise ChartError(f"bad numeric value on line {line}: {exc}") from exc
                series.setdefault(row["method"], []).append(point)
    except OSError as exc:
        raise ChartError(f"cannot read trace {trace_path}: {exc}") from exc
    if not series:
        raise ChartError("trace has no pop=all data rows")
    return series


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if span / step <= target:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + step * 1e-9:
        ticks.append(round(value, 12))
        value += step
    return ticks


def _fmt_num(value: float) -> str:
    return format(value, "g")


def render_chart(trace_path, out_path) -> Path:
    """Write an SVG line chart (x: iteration, y: total regret, one polyline
    per method, linear axes, legend). Deterministic for identical input."""
    series = _read_series(trace_path)

    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = float(min(xs)), float(max(xs))
    y_lo, y_hi = min(0.0, min(ys)), float(max(ys))
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]

    axis_color = "#333333"
    grid_color = "#dddddd"
    for tick in _nice_ticks(x_lo, x_hi):
        x = px(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{MARGIN_TOP}" x2="{x:.2f}" '
            f'y2="{MARGIN_TOP + plot_h}" stroke="{grid_color}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{MARGIN_TOP + plot_h + 20}" font-family="sans-serif" '
            f'font-size="12" fill="{axis_color}" text-anchor="middle">{_fmt_num(tick)}</text>'
        )
    for tick in _nice_ticks(y_lo, y_hi):
        y = py(tick)
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" x2="{MARGIN_LEFT + plot_w}" '
            f'y2="{y:.2f}" stroke="{grid_color}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-family="sans-serif" '
            f'font-size="12" fill="{axis_color}" text-anchor="end">{_fmt_num(tick)}</text>'
        )

    parts.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="{axis_color}" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 15}" font-family="sans-serif" '
        f'font-size="14" fill="{axis_color}" text-anchor="middle">iteration</text>'
    )
    parts.append(
        f'<text x="20" y="{MARGIN_TOP + plot_h / 2:.2f}" font-family="sans-serif" '
        f'font-size="14" fill="{axis_color}" text-anchor="middle" '
        f'transform="rotate(-90 20 {MARGIN_TOP + plot_h / 2:.2f})">total regret</text>'
    )

    legend_x = MARGIN_LEFT + plot_w + 16
    for idx, (method, points) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        ly = MARGIN_TOP + 12 + idx * 22
        parts.append(
            f'<line x1="{legend_x}" y1="{ly}" x2="{legend_x + 24}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{legend_x + 30}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="13" fill="{axis_color}">{method}</text>'
        )

    parts.append("</svg>")
    out_path = Path(out_path)
    out_path.write_text("\n".join(parts) + "\n")
    return out_path
