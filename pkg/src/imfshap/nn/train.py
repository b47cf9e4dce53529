"""Seeded mini-batch training with early stopping, and prediction in original units."""

from __future__ import annotations

import logging
import math
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from ..series import Scaler, WindowedDataset
from .adam import AdamState, adam_update
from .models import Model, backward, init_lstm, init_mlp, mse_loss

logger = logging.getLogger(__name__)


def sub_seed(seed: int, name: str) -> np.random.SeedSequence:
    """Independent, named child seed of the run seed (e.g. ``init``, ``shuffle``, ``baselines``)."""
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())])


def rng_for(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(sub_seed(seed, name))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 50
    patience: int = 5
    monitor_fraction: float = 0.1
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("learning rate, batch size and epoch cap must be positive")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if not 0.0 < self.monitor_fraction < 1.0:
            raise ValueError("monitor_fraction must lie in (0, 1)")

    @classmethod
    def for_model(cls, kind: str, **overrides) -> TrainConfig:
        """Defaults per architecture: 50 epochs for the MLP, 100 for the LSTM."""
        overrides.setdefault("max_epochs", 50 if kind == "mlp" else 100)
        return cls(**overrides)


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    monitor_loss: list[float] = field(default_factory=list)
    initial_monitor_loss: float = float("nan")
    best_epoch: int = 0
    stopped_epoch: int = 0

    @property
    def best_monitor_loss(self) -> float:
        return self.monitor_loss[self.best_epoch - 1] if self.best_epoch else self.initial_monitor_loss

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ForecastModel:
    """A network plus everything needed to apply it to raw channel data."""

    net: Model
    train_config: TrainConfig
    input_scaler: Scaler | None = None
    target_scaler: Scaler | None = None
    channel_ids: list[int] | None = None

    @property
    def kind(self) -> str:
        return self.net.kind


def build_model(kind: str, window: int, channels: int, seed: int, hidden: int = 64, units: int = 10) -> Model:
    rng = rng_for(seed, "init")
    if kind == "mlp":
        return init_mlp(window, channels, hidden, rng)
    if kind == "lstm":
        return init_lstm(window, channels, units, rng)
    raise ValueError(f"unknown model kind {kind!r}")


def monitor_split(n_samples: int, fraction: float) -> int:
    """Index where the chronologically last ``fraction`` of windows (the monitor slice) begins."""
    n_monitor = max(1, math.ceil(fraction * n_samples))
    if n_samples - n_monitor < 1:
        raise ValueError(f"{n_samples} windows cannot be split into fit and monitor slices")
    return n_samples - n_monitor


def train(model: Model, dataset: WindowedDataset, config: TrainConfig) -> tuple[Model, TrainHistory]:
    """Fit ``model`` on ``dataset.targets`` with Adam and early stopping.

    The monitor slice never contributes gradients; the returned model carries
    the parameters from the epoch with the lowest monitor loss.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    model = model.copy()
    cut = monitor_split(len(dataset), config.monitor_fraction)
    x_fit, y_fit = dataset.inputs[:cut], dataset.targets[:cut]
    x_mon, y_mon = dataset.inputs[cut:], dataset.targets[cut:]
    n_fit = len(y_fit)
    batch = config.batch_size if n_fit >= 2 * config.batch_size else n_fit
    shuffle_rng = rng_for(config.seed, "shuffle")
    state = AdamState.zeros_like(model.params)

    history = TrainHistory(initial_monitor_loss=mse_loss(model, x_mon, y_mon))
    best_loss = history.initial_monitor_loss
    best_params = {k: v.copy() for k, v in model.params.items()}
    wait = 0
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n_fit)
        for start in range(0, n_fit, batch):
            idx = order[start : start + batch]
            loss, grads = backward(model, x_fit[idx], y_fit[idx])
            if not math.isfinite(loss):
                raise FloatingPointError(f"non-finite training loss at epoch {epoch}, batch starting at {start}")
            adam_update(model.params, grads, state, config.learning_rate, config.beta1, config.beta2, config.eps)
        train_loss = mse_loss(model, x_fit, y_fit)
        monitor_loss = mse_loss(model, x_mon, y_mon)
        if not (math.isfinite(train_loss) and math.isfinite(monitor_loss)):
            raise FloatingPointError(f"non-finite loss after epoch {epoch}")
        history.train_loss.append(train_loss)
        history.monitor_loss.append(monitor_loss)
        history.stopped_epoch = epoch
        if monitor_loss < best_loss:
            best_loss = monitor_loss
            best_params = {k: v.copy() for k, v in model.params.items()}
            history.best_epoch = epoch
            wait = 0
        else:
            wait += 1
            if wait >= max(config.patience, 1):
                logger.info("early stop at epoch %d (best %d)", epoch, history.best_epoch)
                break
    model.params = best_params
    return model, history


def predict_series(model: ForecastModel | Model, dataset: WindowedDataset) -> np.ndarray:
    """One forecast per window, mapped back to original units when the dataset is scaled."""
    if isinstance(model, ForecastModel):
        net = model.net
        if dataset.target_scaler is not None and model.target_scaler is not None:
            if model.target_scaler.to_dict() != dataset.target_scaler.to_dict():
                raise ValueError("dataset was built with a different target scaler than the model")
    else:
        net = model
    preds = net.predict(dataset.inputs)
    if dataset.target_scaler is None:
        return preds
    return dataset.target_scaler.inverse_transform(preds[:, None])[:, 0]
