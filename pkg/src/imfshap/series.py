"""Univariate series model, chronological splits, scaling and sliding windows."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

MIN_SPLIT_LENGTH = 8


@dataclass(frozen=True)
class Series:
    """A timestamped univariate series.

    ``timestamps`` may hold ISO date strings or integer ticks; they only need
    to be strictly increasing.
    """

    name: str
    timestamps: tuple
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if len(values) < 3:
            raise ValueError(f"series {self.name!r} needs at least 3 values, got {len(values)}")
        if len(self.timestamps) != len(values):
            raise ValueError("timestamps and values differ in length")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"series {self.name!r} has a non-finite value at row {bad}")
        for i in range(1, len(self.timestamps)):
            if not self.timestamps[i - 1] < self.timestamps[i]:
                raise ValueError(
                    f"timestamps not strictly increasing at row {i}: "
                    f"{self.timestamps[i - 1]!r} -> {self.timestamps[i]!r}"
                )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_values(cls, values: Sequence[float], name: str = "series") -> Series:
        return cls(name=name, timestamps=tuple(range(len(values))), values=np.asarray(values, dtype=float))


@dataclass(frozen=True)
class SplitSpec:
    """Contiguous train/validation index ranges, half-open ``[start, stop)``."""

    train_fraction: float
    length: int
    boundary: int

    @property
    def train_range(self) -> range:
        return range(0, self.boundary)

    @property
    def val_range(self) -> range:
        return range(self.boundary, self.length)


def chronological_split(length: int, fraction: float = 0.75) -> SplitSpec:
    """Split ``length`` ordered rows into a leading train block and trailing validation block."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"split fraction must lie in (0, 1), got {fraction}")
    if length < MIN_SPLIT_LENGTH:
        raise ValueError(f"series of length {length} is too short to split (need >= {MIN_SPLIT_LENGTH})")
    boundary = math.floor(fraction * length)
    if boundary < 2 or length - boundary < 2:
        raise ValueError(f"split of {length} rows at {fraction} leaves an empty side")
    return SplitSpec(train_fraction=fraction, length=length, boundary=boundary)


@dataclass
class Scaler:
    """Per-channel affine scaler fitted on a row range: ``(v - offset) / span``.

    ``kind`` is ``"minmax"`` (offset=min, span=(max-min)/upper) or
    ``"standard"`` (offset=mean, span=std/upper). Constant channels get offset 0
    and span 1, i.e. the identity transform.
    """

    kind: str
    offset: np.ndarray
    span: np.ndarray
    constant: np.ndarray
    fitted_range: tuple[int, int]

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        return (matrix - self.offset) / self.span

    def inverse_transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        return matrix * self.span + self.offset

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "offset": self.offset.tolist(),
            "span": self.span.tolist(),
            "constant": self.constant.tolist(),
            "fitted_range": list(self.fitted_range),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Scaler:
        return cls(
            kind=data["kind"],
            offset=np.asarray(data["offset"], dtype=float),
            span=np.asarray(data["span"], dtype=float),
            constant=np.asarray(data["constant"], dtype=bool),
            fitted_range=tuple(data["fitted_range"]),
        )

    def select(self, channels: Sequence[int]) -> Scaler:
        """Scaler restricted to a subset of channels."""
        idx = list(channels)
        return Scaler(self.kind, self.offset[idx], self.span[idx], self.constant[idx], self.fitted_range)


def fit_scaler(
    matrix: np.ndarray, train_range: range | tuple[int, int], kind: str = "minmax", upper: float = 1.0
) -> Scaler:
    """Fit per-channel scaling parameters on the rows of ``train_range`` only.

    ``matrix`` is (time, channels); a 1-D input is treated as a single channel.
    Min-max scaling maps the fitted rows onto ``[0, upper]``; for the standard
    variant ``upper`` is the standard deviation of the scaled rows.
    """
    if not upper > 0:
        raise ValueError("scaler upper bound must be positive")
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    start, stop = _bounds(train_range)
    if stop <= start:
        raise ValueError("cannot fit a scaler on an empty range")
    rows = matrix[start:stop]
    if kind == "minmax":
        offset = rows.min(axis=0)
        span = rows.max(axis=0) - offset
    elif kind == "standard":
        offset = rows.mean(axis=0)
        span = rows.std(axis=0)
    else:
        raise ValueError(f"unknown scaler kind {kind!r}")
    constant = ~(span > 0)
    span = span / upper
    if constant.any():
        logger.warning("constant channel(s) %s on the fit range; using identity scaling", np.flatnonzero(constant).tolist())
        offset = np.where(constant, 0.0, offset)
        span = np.where(constant, 1.0, span)
    return Scaler(kind=kind, offset=offset, span=span, constant=constant, fitted_range=(start, stop))


@dataclass
class WindowedDataset:
    """Sliding windows over channels with next-step targets from the original series.

    ``inputs[s]`` holds rows ``t-N+1 .. t`` and ``targets[s]`` the original
    series at ``t+1 == sample_time_index[s]``. ``targets`` is in model space
    (scaled when a target scaler was supplied) and ``raw_targets`` in original
    units.
    """

    inputs: np.ndarray
    targets: np.ndarray
    raw_targets: np.ndarray
    sample_time_index: np.ndarray
    window: int
    target_scaler: Scaler | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def num_channels(self) -> int:
        return self.inputs.shape[2]

    def subset(self, idx: slice | np.ndarray) -> WindowedDataset:
        return WindowedDataset(
            inputs=self.inputs[idx],
            targets=self.targets[idx],
            raw_targets=self.raw_targets[idx],
            sample_time_index=self.sample_time_index[idx],
            window=self.window,
            target_scaler=self.target_scaler,
        )


def make_windows(
    matrix: np.ndarray,
    original: Series | np.ndarray,
    index_range: range | tuple[int, int],
    window: int,
    target_scaler: Scaler | None = None,
) -> WindowedDataset:
    """Build one-step-ahead windows whose inputs and targets both lie inside ``index_range``."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    raw = np.asarray(original.values if isinstance(original, Series) else original, dtype=float)
    if len(raw) != len(matrix):
        raise ValueError("channel matrix and original series differ in length")
    if window < 1:
        raise ValueError("window length must be >= 1")
    start, stop = _bounds(index_range)
    if stop - start < window + 1:
        raise ValueError(f"range of length {stop - start} is too short for window {window} plus one target")
    n_samples = stop - start - window
    # target time for sample s is start + window + s; its window ends one step earlier
    target_times = np.arange(start + window, stop)
    offsets = np.arange(-window, 0)
    inputs = matrix[target_times[:, None] + offsets[None, :]]
    raw_targets = raw[target_times].copy()
    targets = raw_targets if target_scaler is None else target_scaler.transform(raw_targets[:, None])[:, 0]
    assert inputs.shape == (n_samples, window, matrix.shape[1])
    return WindowedDataset(
        inputs=inputs,
        targets=np.asarray(targets, dtype=float),
        raw_targets=raw_targets,
        sample_time_index=target_times,
        window=window,
        target_scaler=target_scaler,
    )


def _bounds(index_range: range | tuple[int, int]) -> tuple[int, int]:
    if isinstance(index_range, range):
        if index_range.step != 1:
            raise ValueError("ranges must be contiguous")
        return index_range.start, index_range.stop
    start, stop = index_range
    return int(start), int(stop)
