"""Static SVG charts written by hand so the bytes depend only on the data."""

from __future__ import annotations

import json
import logging
from html import escape
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

WIDTH, HEIGHT, PAD = 800, 400, 50


def _points(x: np.ndarray, y: np.ndarray, lo: float, hi: float) -> str:
    n = len(x)
    xs = PAD + (WIDTH - 2 * PAD) * (np.arange(n) / max(n - 1, 1))
    span = hi - lo if hi > lo else 1.0
    ys = HEIGHT - PAD - (HEIGHT - 2 * PAD) * (np.asarray(y, dtype=float) - lo) / span
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))


def prediction_svg(labels: Sequence[str], actual: np.ndarray, predicted: np.ndarray, title: str = "") -> str:
    """Actual vs predicted overlay for the validation block."""
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    lo = float(min(actual.min(), predicted.min()))
    hi = float(max(actual.max(), predicted.max()))
    first, last = (labels[0], labels[-1]) if len(labels) else ("", "")
    return "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.0f}" y="25" text-anchor="middle" font-size="16">{escape(title)}</text>',
            f'<text x="{PAD}" y="{HEIGHT - 15}" font-size="11">{escape(str(first))}</text>',
            f'<text x="{WIDTH - PAD}" y="{HEIGHT - 15}" font-size="11" text-anchor="end">{escape(str(last))}</text>',
            f'<text x="5" y="{PAD}" font-size="11">{hi:.3f}</text>',
            f'<text x="5" y="{HEIGHT - PAD}" font-size="11">{lo:.3f}</text>',
            f'<polyline class="actual" fill="none" stroke="black" stroke-width="1" points="{_points(np.arange(len(actual)), actual, lo, hi)}"/>',
            f'<polyline class="predicted" fill="none" stroke="crimson" stroke-width="1" points="{_points(np.arange(len(predicted)), predicted, lo, hi)}"/>',
            f'<text x="{WIDTH - PAD}" y="45" font-size="12" text-anchor="end">black: actual, red: predicted</text>',
            "</svg>",
            "",
        ]
    )


def importance_svg(names: Sequence[str], percents: Sequence[float], title: str = "") -> str:
    """Horizontal bars of channel shares, largest first."""
    order = sorted(range(len(names)), key=lambda k: (-percents[k], k))
    bar_h = 24
    height = 60 + bar_h * len(order)
    left, right = 120, WIDTH - 80
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="25" text-anchor="middle" font-size="16">{escape(title)}</text>',
    ]
    for row, k in enumerate(order):
        y = 45 + row * bar_h
        w = (right - left) * percents[k] / 100.0
        lines.append(f'<text x="{left - 8}" y="{y + 16}" font-size="12" text-anchor="end">{escape(names[k])}</text>')
        lines.append(f'<rect class="bar" x="{left}" y="{y + 3}" width="{w:.2f}" height="{bar_h - 6}" fill="steelblue"/>')
        lines.append(f'<text x="{left + w + 6:.2f}" y="{y + 16}" font-size="12">{percents[k]:.2f}%</text>')
    lines += ["</svg>", ""]
    return "\n".join(lines)


def render_plots(out_dir: str | Path, kinds: Sequence[str]) -> list[Path]:
    """Write overlay and importance charts for every model found in ``out_dir``."""
    from .pipeline import read_predictions_csv

    out_dir = Path(out_dir)
    written = []
    for kind in kinds:
        pred_file = out_dir / f"predictions_{kind}.csv"
        if pred_file.exists():
            labels, actual, predicted = read_predictions_csv(pred_file)
            path = out_dir / f"predictions_{kind}.svg"
            path.write_text(prediction_svg(labels, actual, predicted, f"{kind.upper()} one-step forecasts (validation)"))
            written.append(path)
        attr_file = out_dir / f"attribution_{kind}.json"
        if attr_file.exists():
            doc = json.loads(attr_file.read_text())
            if doc.get("degenerate"):
                logger.warning("skipping importance chart for %s: degenerate attribution", kind)
                continue
            names = [c["name"] for c in doc["channels"]]
            percents = [c["percent"] for c in doc["channels"]]
            path = out_dir / f"importance_{kind}.svg"
            path.write_text(importance_svg(names, percents, f"{kind.upper()} DeepSHAP channel importance"))
            written.append(path)
    return written
