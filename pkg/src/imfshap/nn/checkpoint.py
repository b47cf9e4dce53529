"""JSON checkpoints. Floats are written with ``repr`` precision so a load round-trips bitwise."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..series import Scaler
from .models import LstmModel, MlpModel
from .train import ForecastModel, TrainConfig

CHECKPOINT_FORMAT = "imfshap-checkpoint"
CHECKPOINT_VERSION = 1


def to_dict(model: ForecastModel) -> dict:
    net = model.net
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": net.kind,
        "window": net.window,
        "channels": net.channels,
        "channel_ids": model.channel_ids,
        "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in sorted(net.params.items())},
        "train_config": asdict(model.train_config),
        "input_scaler": model.input_scaler.to_dict() if model.input_scaler else None,
        "target_scaler": model.target_scaler.to_dict() if model.target_scaler else None,
    }


def from_dict(data: dict) -> ForecastModel:
    if data.get("format") != CHECKPOINT_FORMAT:
        raise ValueError("not a model checkpoint")
    if data.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {data.get('version')}")
    params = {k: np.asarray(v["data"], dtype=float).reshape(v["shape"]) for k, v in data["params"].items()}
    cls = {"mlp": MlpModel, "lstm": LstmModel}[data["kind"]]
    net = cls(params, data["window"], data["channels"])
    return ForecastModel(
        net=net,
        train_config=TrainConfig(**data["train_config"]),
        input_scaler=Scaler.from_dict(data["input_scaler"]) if data["input_scaler"] else None,
        target_scaler=Scaler.from_dict(data["target_scaler"]) if data["target_scaler"] else None,
        channel_ids=data["channel_ids"],
    )


def save(model: ForecastModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_dict(model), indent=1) + "\n")


def load(path: str | Path) -> ForecastModel:
    return from_dict(json.loads(Path(path).read_text()))
