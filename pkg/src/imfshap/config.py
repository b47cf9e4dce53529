"""Run configuration stored as a flat ``key = value`` text file."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .emd import SiftConfig
from .nn.train import TrainConfig

MODEL_CHOICES = ("mlp", "lstm", "both")

# keys that only say where files live; they never change results
LOCATION_KEYS = ("input", "out")


@dataclass
class PipelineConfig:
    input: str = ""
    column: str = "Close"
    model: str = "mlp"
    window: int = 10
    split: float = 0.75
    scaler: str = "minmax"
    scale_upper: float = 0.01
    include_residual: bool = True
    # sifting
    sd_threshold: float = 0.2
    max_sift_iterations: int = 100
    max_imfs: int = 16
    boundary_policy: str = "mirror"
    # training
    learning_rate: float = 1e-3
    batch_size: int = 64
    mlp_epochs: int = 50
    lstm_epochs: int = 100
    patience: int = 5
    monitor_fraction: float = 0.1
    hidden: int = 64
    units: int = 10
    seed: int = 0
    # attribution
    background: int = 100
    score_mode: str = "abs_of_sum"
    exclude_imfs: tuple[int, ...] = field(default_factory=tuple)
    plots: bool = True
    # wall-clock timings vary between runs, so writing them is opt-in
    record_timings: bool = False
    out: str = "run"

    def __post_init__(self) -> None:
        if self.model not in MODEL_CHOICES:
            raise ValueError(f"model must be one of {MODEL_CHOICES}, got {self.model!r}")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not 0 < self.split < 1:
            raise ValueError("split must lie in (0, 1)")
        if self.background < 1:
            raise ValueError("background must be >= 1")
        self.exclude_imfs = tuple(sorted(set(int(k) for k in self.exclude_imfs)))
        if any(k < 1 for k in self.exclude_imfs):
            raise ValueError("exclude_imfs are 1-based channel numbers")

    @property
    def model_kinds(self) -> tuple[str, ...]:
        return ("mlp", "lstm") if self.model == "both" else (self.model,)

    def sift_config(self) -> SiftConfig:
        return SiftConfig(
            sd_threshold=self.sd_threshold,
            max_sift_iterations=self.max_sift_iterations,
            max_imfs=self.max_imfs,
            boundary_policy=self.boundary_policy,
        )

    def train_config(self, kind: str) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.mlp_epochs if kind == "mlp" else self.lstm_epochs,
            patience=self.patience,
            monitor_fraction=self.monitor_fraction,
            seed=self.seed,
        )

    def to_text(self, include_locations: bool = True) -> str:
        lines = []
        for f in dataclasses.fields(self):
            if not include_locations and f.name in LOCATION_KEYS:
                continue
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """SHA-256 over every result-affecting key (input and output paths excluded)."""
        return hashlib.sha256(self.to_text(include_locations=False).encode()).hexdigest()

    @classmethod
    def from_text(cls, text: str) -> PipelineConfig:
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            values[key] = _parse(value, types[key], key)
        return cls(**values)

    @classmethod
    def load(cls, path: str | Path) -> PipelineConfig:
        return cls.from_text(Path(path).read_text())

    def replace(self, **changes) -> PipelineConfig:
        return dataclasses.replace(self, **changes)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(value: str, type_name: str, key: str):
    try:
        if type_name == "int":
            return int(value)
        if type_name == "float":
            return float(value)
        if type_name == "bool":
            lowered = value.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return lowered in ("true", "1", "yes")
        if type_name.startswith("tuple"):
            return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError as exc:
        raise ValueError(f"config key {key!r}: cannot parse {value!r} as {type_name}") from exc
    return value
