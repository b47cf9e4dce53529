"""Forecast error metrics in original units."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAPE_ZERO_GUARD = 1e-9
SSTOT_GUARD = 1e-12


@dataclass
class MetricsBundle:
    mse: float
    rmse: float
    mae: float
    mape: float | None
    r2: float | None
    n: int
    omitted: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        values = {"mse": self.mse, "rmse": self.rmse, "mae": self.mae, "mape": self.mape, "r2": self.r2}
        return {
            "n": self.n,
            "values": values,
            "display": {k: (None if v is None else f"{v:.3f}") for k, v in values.items()},
            "omitted": dict(self.omitted),
        }


def compute_metrics(targets, predictions) -> MetricsBundle:
    """MSE, RMSE, MAE, MAPE (percent) and R^2 of ``predictions`` against ``targets``.

    MAPE is dropped when any target is within 1e-9 of zero; R^2 (and MAPE with
    it) is dropped when the targets are constant.
    """
    y = np.asarray(targets, dtype=float)
    yhat = np.asarray(predictions, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValueError(f"targets and predictions must be equal-length vectors, got {y.shape} and {yhat.shape}")
    if len(y) == 0:
        raise ValueError("cannot score an empty forecast")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(yhat))):
        raise ValueError("targets and predictions must be finite")
    err = yhat - y
    mse = float(np.mean(err**2))
    omitted: dict[str, str] = {}
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2: float | None = None
    if ss_tot < SSTOT_GUARD:
        omitted["r2"] = "constant targets"
        omitted["mape"] = "constant targets"
    else:
        r2 = 1.0 - float(np.sum(err**2)) / ss_tot
    mape: float | None = None
    if np.any(np.abs(y) <= MAPE_ZERO_GUARD):
        omitted["mape"] = "target within zero guard"
    elif "mape" not in omitted:
        mape = 100.0 * float(np.mean(np.abs(err / y)))
    return MetricsBundle(mse=mse, rmse=math.sqrt(mse), mae=float(np.mean(np.abs(err))), mape=mape, r2=r2, n=len(y), omitted=omitted)
