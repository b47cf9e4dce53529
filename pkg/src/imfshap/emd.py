"""Empirical mode decomposition: extrema, spline envelopes, sifting and full decomposition."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .series import Series
from .spline import natural_cubic_spline

logger = logging.getLogger(__name__)

BOUNDARY_POLICIES = ("mirror", "clamp")


@dataclass(frozen=True)
class SiftConfig:
    sd_threshold: float = 0.2
    max_sift_iterations: int = 100
    max_imfs: int = 16
    boundary_policy: str = "mirror"
    mirror_extrema: int = 2
    envelope_tolerance: float = 0.05

    def __post_init__(self) -> None:
        if self.sd_threshold <= 0:
            raise ValueError("sd_threshold must be positive")
        if self.max_sift_iterations < 1 or self.max_imfs < 1:
            raise ValueError("iteration and IMF caps must be >= 1")
        if self.boundary_policy not in BOUNDARY_POLICIES:
            raise ValueError(f"boundary_policy must be one of {BOUNDARY_POLICIES}")
        if self.mirror_extrema < 1:
            raise ValueError("mirror_extrema must be >= 1")


@dataclass(frozen=True)
class ExtremaSet:
    maxima: np.ndarray
    minima: np.ndarray

    @property
    def count(self) -> int:
        return len(self.maxima) + len(self.minima)


@dataclass(frozen=True)
class ImfCheck:
    passes: bool
    extrema_count: int
    crossing_count: int
    max_envelope_mean: float


@dataclass(frozen=True)
class SiftResult:
    imf: np.ndarray
    iterations: int
    converged: bool


@dataclass
class Decomposition:
    """IMFs ordered from highest to lowest frequency plus the residual."""

    source: np.ndarray
    imfs: list[np.ndarray]
    residual: np.ndarray
    config: SiftConfig = field(default_factory=SiftConfig)
    sift_iterations: list[int] = field(default_factory=list)
    hit_imf_cap: bool = False

    @property
    def source_length(self) -> int:
        return len(self.source)

    @property
    def num_imfs(self) -> int:
        return len(self.imfs)

    def channels(self, include_residual: bool = True) -> np.ndarray:
        """(time, channels) matrix; the residual is the last channel when included."""
        cols = list(self.imfs) + ([self.residual] if include_residual else [])
        if not cols:
            return np.empty((self.source_length, 0))
        return np.column_stack(cols)

    def reconstruction_error(self) -> float:
        """Relative L-infinity error of sum(IMFs) + residual against the source."""
        total = self.residual + (np.sum(self.imfs, axis=0) if self.imfs else 0.0)
        scale = max(np.max(np.abs(self.source)), np.finfo(float).tiny)
        return float(np.max(np.abs(total - self.source)) / scale)

    def config_dict(self) -> dict:
        return asdict(self.config)


def find_extrema(values: np.ndarray) -> ExtremaSet:
    """Interior strict local maxima and minima.

    A flat run counts once, at its lower-midpoint index, when both of its
    neighbours lie on the same side of it.
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        raise ValueError("need at least 3 samples to locate extrema")
    # collapse runs of equal values
    change = np.flatnonzero(np.diff(values) != 0) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [len(values) - 1]))
    run_vals = values[starts]
    if len(run_vals) < 3:
        empty = np.empty(0, dtype=int)
        return ExtremaSet(empty, empty)
    left = run_vals[1:-1] - run_vals[:-2]
    right = run_vals[1:-1] - run_vals[2:]
    mid = (starts[1:-1] + ends[1:-1]) // 2
    maxima = mid[(left > 0) & (right > 0)]
    minima = mid[(left < 0) & (right < 0)]
    return ExtremaSet(maxima.astype(int), minima.astype(int))


def count_zero_crossings(values: np.ndarray) -> int:
    """Sign changes, skipping exact zeros so a run of zeros between opposite signs counts once."""
    values = np.asarray(values, dtype=float)
    signs = np.sign(values)
    signs = signs[signs != 0]
    if len(signs) < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _extend_knots(values: np.ndarray, idx: np.ndarray, policy: str, nsym: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(values)
    idx = np.asarray(idx, dtype=int)
    if policy == "clamp":
        inner = idx[(idx > 0) & (idx < n - 1)]
        src = np.concatenate(([0], inner, [n - 1]))
        return src.astype(float), values[src]
    if len(idx) == 0:
        return idx.astype(float), values[idx]
    # reflect the outermost extrema about the end samples
    head = idx[:nsym][::-1]
    tail = idx[-nsym:][::-1]
    knots = np.concatenate((-head.astype(float), idx.astype(float), 2.0 * (n - 1) - tail))
    knot_vals = np.concatenate((values[head], values[idx], values[tail]))
    return knots, knot_vals


def cubic_envelope(values: np.ndarray, extrema_indices: np.ndarray, boundary_policy: str = "mirror", nsym: int = 2) -> np.ndarray:
    """Natural cubic spline through the extrema, evaluated at every sample index."""
    values = np.asarray(values, dtype=float)
    knots, knot_vals = _extend_knots(values, np.asarray(extrema_indices), boundary_policy, nsym)
    if len(knots) < 2:
        raise ValueError("fewer than 2 envelope knots after boundary extension")
    return natural_cubic_spline(knots, knot_vals, np.arange(len(values), dtype=float))


def _envelope_mean(values: np.ndarray, ext: ExtremaSet, config: SiftConfig) -> np.ndarray | None:
    if len(ext.maxima) == 0 or len(ext.minima) == 0:
        return None
    upper = cubic_envelope(values, ext.maxima, config.boundary_policy, config.mirror_extrema)
    lower = cubic_envelope(values, ext.minima, config.boundary_policy, config.mirror_extrema)
    return 0.5 * (upper + lower)


def check_imf_conditions(values: np.ndarray, tolerance: float = 0.05, config: SiftConfig | None = None) -> ImfCheck:
    """Test the two IMF conditions.

    Extrema and zero-crossing counts must differ by at most one, and the
    envelope mean must stay within ``tolerance`` times the RMS of ``values``.
    The mean is judged only where both envelopes interpolate (from the later
    of the first maximum/minimum to the earlier of the last ones); beyond that
    it is an artifact of the boundary policy that sifting cannot remove.
    """
    config = config or SiftConfig()
    values = np.asarray(values, dtype=float)
    ext = find_extrema(values)
    crossings = count_zero_crossings(values)
    mean = _envelope_mean(values, ext, config)
    if mean is None:
        return ImfCheck(False, ext.count, crossings, float("inf"))
    lo = max(ext.maxima[0], ext.minima[0])
    hi = min(ext.maxima[-1], ext.minima[-1])
    span = mean[lo : hi + 1] if hi >= lo else mean
    max_mean = float(np.max(np.abs(span)))
    rms = float(np.sqrt(np.mean(values**2)))
    passes = abs(ext.count - crossings) <= 1 and max_mean <= tolerance * rms
    return ImfCheck(passes, ext.count, crossings, max_mean)


def sift(residual_in: np.ndarray, config: SiftConfig | None = None) -> SiftResult:
    """Extract one IMF by repeatedly subtracting the envelope mean."""
    config = config or SiftConfig()
    h = np.asarray(residual_in, dtype=float).copy()
    ext = find_extrema(h)
    if ext.count < 3:
        raise ValueError(f"sifting needs >= 3 interior extrema, got {ext.count}")
    eps = np.finfo(float).eps * max(float(np.max(h**2)), np.finfo(float).tiny)
    for iteration in range(1, config.max_sift_iterations + 1):
        mean = _envelope_mean(h, ext, config)
        if mean is None:
            return SiftResult(h, iteration - 1, False)
        h_new = h - mean
        sd = float(np.sum((h - h_new) ** 2 / (h**2 + eps)))
        h = h_new
        ext = find_extrema(h)
        if sd < config.sd_threshold:
            return SiftResult(h, iteration, True)
        if ext.count >= 3 and check_imf_conditions(h, config.envelope_tolerance, config).passes:
            return SiftResult(h, iteration, True)
        if ext.count < 3:
            return SiftResult(h, iteration, False)
    logger.debug("sifting hit the iteration cap of %d", config.max_sift_iterations)
    return SiftResult(h, config.max_sift_iterations, False)


def decompose(series: Series | np.ndarray, config: SiftConfig | None = None) -> Decomposition:
    """Peel IMFs off ``series`` until the residual has fewer than 3 interior extrema."""
    config = config or SiftConfig()
    source = np.asarray(series.values if isinstance(series, Series) else series, dtype=float).copy()
    residual = source.copy()
    imfs: list[np.ndarray] = []
    iterations: list[int] = []
    hit_cap = False
    while True:
        if find_extrema(residual).count < 3:
            break
        if len(imfs) >= config.max_imfs:
            hit_cap = True
            break
        result = sift(residual, config)
        imfs.append(result.imf)
        iterations.append(result.iterations)
        residual = residual - result.imf
    return Decomposition(source, imfs, residual, config, iterations, hit_cap)
