"""Natural cubic spline interpolation via a tridiagonal (Thomas) solve."""

from __future__ import annotations

import numpy as np


def solve_tridiagonal(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Thomas algorithm for a diagonally dominant tridiagonal system.

    ``lower[i]`` multiplies ``x[i-1]`` in row ``i`` (``lower[0]`` unused) and
    ``upper[i]`` multiplies ``x[i+1]`` (``upper[-1]`` unused).
    """
    n = len(diag)
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / denom
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def natural_second_derivatives(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivatives at the knots of the natural cubic spline (zero at both ends)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    m = np.zeros(n)
    if n < 3:
        return m
    h = np.diff(x)
    if np.any(h <= 0):
        raise ValueError("spline knots must be strictly increasing")
    slope = np.diff(y) / h
    lower = h[:-1].copy()
    diag = 2.0 * (h[:-1] + h[1:])
    upper = h[1:].copy()
    rhs = 6.0 * np.diff(slope)
    m[1:-1] = solve_tridiagonal(lower, diag, upper, rhs)
    return m


def natural_cubic_spline(x: np.ndarray, y: np.ndarray, at: np.ndarray) -> np.ndarray:
    """Evaluate the natural cubic spline through ``(x, y)`` at points ``at``.

    Points outside the knot span are extrapolated with the end cubic pieces.
    Two knots give the straight line through them.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    at = np.asarray(at, dtype=float)
    if len(x) < 2:
        raise ValueError("a spline needs at least 2 knots")
    m = natural_second_derivatives(x, y)
    seg = np.clip(np.searchsorted(x, at, side="right") - 1, 0, len(x) - 2)
    x0, x1 = x[seg], x[seg + 1]
    y0, y1 = y[seg], y[seg + 1]
    m0, m1 = m[seg], m[seg + 1]
    h = x1 - x0
    a = (x1 - at) / h
    b = (at - x0) / h
    return a * y0 + b * y1 + ((a**3 - a) * m0 + (b**3 - b) * m1) * h * h / 6.0
