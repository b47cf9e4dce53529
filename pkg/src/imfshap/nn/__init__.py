from .adam import AdamState, adam_update
from .models import (
    LstmModel,
    MlpModel,
    backward,
    init_lstm,
    init_mlp,
    lstm_forward,
    lstm_step,
    mlp_forward,
)
from .train import ForecastModel, TrainConfig, TrainHistory, build_model, predict_series, train

__all__ = [
    "AdamState",
    "ForecastModel",
    "LstmModel",
    "MlpModel",
    "TrainConfig",
    "TrainHistory",
    "adam_update",
    "backward",
    "build_model",
    "init_lstm",
    "init_mlp",
    "lstm_forward",
    "lstm_step",
    "mlp_forward",
    "predict_series",
    "train",
]
