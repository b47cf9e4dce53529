"""Synthetic series used by the tests, the acceptance suite and the CLI demo."""

from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

import numpy as np

from .series import Series

START_DATE = dt.date(2004, 5, 3)


def business_days(n: int, start: dt.date = START_DATE) -> tuple[str, ...]:
    days = []
    day = start
    while len(days) < n:
        if day.weekday() < 5:
            days.append(day.isoformat())
        day += dt.timedelta(days=1)
    return tuple(days)


def constant(n: int = 500, value: float = 5.0) -> Series:
    return Series("constant", tuple(range(n)), np.full(n, value))


def two_tone(n: int = 2000) -> tuple[Series, np.ndarray, np.ndarray]:
    """``sin(2*pi*10*t) + sin(2*pi*t)`` on ``t in [0, 1]``; also returns the fast and slow tones."""
    t = np.linspace(0.0, 1.0, n)
    fast = np.sin(2 * np.pi * 10 * t)
    slow = np.sin(2 * np.pi * t)
    return Series("two_tone", tuple(range(n)), fast + slow), fast, slow


def trend_tones(n: int = 1500, seed: int = 0, noise: float = 0.05) -> Series:
    """Rising trend plus a fast and a slow oscillation and a little noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float)
    trend = 20.0 + 30.0 * (t / n) + 10.0 * (t / n) ** 2
    values = trend + 1.5 * np.sin(2 * np.pi * t / 23.0) + 3.0 * np.sin(2 * np.pi * t / 160.0) + noise * rng.normal(size=n)
    return Series("trend_tones", business_days(n), values)


def trend_noise(n: int = 1500, seed: int = 0, noise: float = 1.0) -> Series:
    """Rising trend with white noise on top."""
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float)
    values = 50.0 + 40.0 * (t / n) + 3.0 * np.sin(2 * np.pi * t / 250.0) + noise * rng.normal(size=n)
    return Series("trend_noise", business_days(n), values)


def random_walk(n: int = 5000, seed: int = 0) -> Series:
    rng = np.random.default_rng(seed)
    return Series("random_walk", tuple(range(n)), 100.0 + np.cumsum(rng.normal(size=n)))


def stock_like(n: int = 5219, seed: int = 0, drift: float = 6e-4, vol: float = 0.02) -> Series:
    """Geometric random walk resembling a long daily closing-price history."""
    rng = np.random.default_rng(seed)
    log_price = np.log(5.0) + np.cumsum(rng.normal(drift, vol, size=n))
    return Series("stock_like", business_days(n), np.round(np.exp(log_price), 4))


def write_ohlcv_csv(series: Series, path: str | Path) -> Path:
    """Write ``series`` as a daily OHLCV file whose Close column is the series."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"])
        for stamp, v in zip(series.timestamps, series.values):
            c = repr(float(v))
            writer.writerow([stamp, c, c, c, c, c, 1000])
    return path
