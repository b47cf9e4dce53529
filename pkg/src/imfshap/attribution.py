"""DeepLIFT/DeepSHAP attributions over IMF channels, an exact Shapley oracle, and importance aggregation.

Attributions live in model (scaled) space: for a window ``x`` and a baseline
``x'`` the entries of ``phi`` (N lags by K channels) sum to ``f(x) - f(x')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .nn.models import LinearModel, LstmModel, MlpModel, Model, backward_batch, forward_batch, logistic
from .nn.train import ForecastModel, rng_for

NEAR_ZERO = 1e-7
MAX_PLAYERS = 15
SCORE_MODES = ("abs_of_sum", "sum_of_abs")

_DERIVATIVES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": lambda z: 1.0 - np.tanh(z) ** 2,
    "logistic": lambda z: logistic(np.asarray(z, dtype=float)) * (1.0 - logistic(np.asarray(z, dtype=float))),
    "linear": lambda z: np.ones_like(np.asarray(z, dtype=float)),
}


def rescale_multiplier(x_in, ref_in, x_out, ref_out, nonlinearity: str = "tanh"):
    """DeepLIFT rescale rule: ``delta_out / delta_in``.

    Where ``|delta_in| <= 1e-7`` the ratio is replaced by the derivative of the
    nonlinearity at the midpoint of input and reference. Works elementwise on
    arrays; scalars in give a float out.
    """
    x_in, ref_in, x_out, ref_out = (np.asarray(v, dtype=float) for v in (x_in, ref_in, x_out, ref_out))
    d_in = x_in - ref_in
    small = np.abs(d_in) <= NEAR_ZERO
    safe = np.where(small, 1.0, d_in)
    ratio = (x_out - ref_out) / safe
    out = np.where(small, _DERIVATIVES[nonlinearity](0.5 * (x_in + ref_in)), ratio)
    return float(out) if out.ndim == 0 else out


def product_split(u, u_ref, v, v_ref):
    """Shapley split of ``u*v - u_ref*v_ref`` between the two factors."""
    phi_u = (u - u_ref) * (v + v_ref) / 2.0
    phi_v = (v - v_ref) * (u + u_ref) / 2.0
    return phi_u, phi_v


@dataclass
class BaselineSet:
    windows: np.ndarray
    seed: int
    source_index: np.ndarray

    def __len__(self) -> int:
        return len(self.windows)


def draw_baselines(train_inputs: np.ndarray, size: int = 100, seed: int = 0) -> BaselineSet:
    """Sample background windows from the training windows (without replacement when possible)."""
    train_inputs = np.asarray(train_inputs, dtype=float)
    if len(train_inputs) == 0 or size < 1:
        raise ValueError("need at least one training window and size >= 1")
    rng = rng_for(seed, "baselines")
    replace = size > len(train_inputs)
    idx = np.sort(rng.choice(len(train_inputs), size=size, replace=replace))
    return BaselineSet(windows=train_inputs[idx], seed=seed, source_index=idx)


@dataclass
class AttributionMatrix:
    phi: np.ndarray
    prediction: float
    baseline_prediction: float
    per_baseline: np.ndarray | None = field(default=None, repr=False)

    @property
    def delta(self) -> float:
        return self.prediction - self.baseline_prediction


def _net(model: Model | ForecastModel) -> Model:
    return model.net if isinstance(model, ForecastModel) else model


def _shap_factors(model: Model, cache: dict, ref: dict) -> dict | None:
    if isinstance(model, LinearModel):
        return None
    if isinstance(model, MlpModel):
        return {"slope": rescale_multiplier(cache["z"], ref["z"], cache["a"], ref["a"], "tanh")}
    u = model.units
    z, zr = cache["z"], ref["z"]
    mid = lambda a, b: 0.5 * (a + b)  # noqa: E731
    return {
        "di": rescale_multiplier(z[..., :u], zr[..., :u], cache["i"], ref["i"], "logistic"),
        "df": rescale_multiplier(z[..., u : 2 * u], zr[..., u : 2 * u], cache["f"], ref["f"], "logistic"),
        "do": rescale_multiplier(z[..., 2 * u : 3 * u], zr[..., 2 * u : 3 * u], cache["o"], ref["o"], "logistic"),
        "dg": rescale_multiplier(z[..., 3 * u :], zr[..., 3 * u :], cache["g"], ref["g"], "tanh"),
        "dtc": rescale_multiplier(cache["c"], ref["c"], cache["tc"], ref["tc"], "tanh"),
        # product nodes c = f*c_prev + i*g and h = o*tanh(c), split by product_split
        "c_by_f": mid(cache["c_prev"], ref["c_prev"]),
        "c_by_cprev": mid(cache["f"], ref["f"]),
        "c_by_i": mid(cache["g"], ref["g"]),
        "c_by_g": mid(cache["i"], ref["i"]),
        "h_by_o": mid(cache["tc"], ref["tc"]),
        "h_by_tc": mid(cache["o"], ref["o"]),
    }


def deepshap_pairs(model: Model | ForecastModel, windows: np.ndarray, refs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Attributions of each window against its paired reference.

    Returns ``phi`` (P, N, K), ``f(windows)`` and ``f(refs)``.
    """
    net = _net(model)
    y, cache = forward_batch(net, windows)
    y_ref, ref_cache = forward_batch(net, refs)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(y_ref))):
        raise FloatingPointError("non-finite activations during attribution")
    factors = _shap_factors(net, cache, ref_cache)
    _, multipliers = backward_batch(net, cache, np.ones(len(y)), factors, param_grads=False)
    return multipliers * (cache["x"] - ref_cache["x"]), y, y_ref


def deepshap(model: Model | ForecastModel, window: np.ndarray, baselines: BaselineSet | np.ndarray, keep_per_baseline: bool = False) -> AttributionMatrix:
    """DeepSHAP attribution of one (N, K) window, averaged over the baselines."""
    net = _net(model)
    refs = baselines.windows if isinstance(baselines, BaselineSet) else np.asarray(baselines, dtype=float)
    if refs.ndim == 2:
        refs = refs[None]
    window = np.asarray(window, dtype=float)
    if window.shape != (net.window, net.channels) or refs.shape[1:] != window.shape:
        raise ValueError("window and baseline shapes do not match the model")
    tiled = np.broadcast_to(window, refs.shape)
    phi, y, y_ref = deepshap_pairs(net, tiled, refs)
    return AttributionMatrix(
        phi=phi.mean(axis=0),
        prediction=float(y[0]),
        baseline_prediction=float(y_ref.mean()),
        per_baseline=phi if keep_per_baseline else None,
    )


def deepshap_batch(
    model: Model | ForecastModel, windows: np.ndarray, baselines: BaselineSet | np.ndarray, chunk_pairs: int = 20000
) -> tuple[np.ndarray, np.ndarray, float]:
    """Baseline-averaged attributions for many windows.

    Returns ``phi`` (S, N, K), predictions (S,) and the mean baseline prediction.
    """
    net = _net(model)
    refs = baselines.windows if isinstance(baselines, BaselineSet) else np.asarray(baselines, dtype=float)
    windows = np.asarray(windows, dtype=float)
    n_ref = len(refs)
    per_chunk = max(1, chunk_pairs // n_ref)
    phi = np.empty_like(windows)
    preds = np.empty(len(windows))
    base_mean = float(net.predict(refs).mean())
    for start in range(0, len(windows), per_chunk):
        block = windows[start : start + per_chunk]
        x = np.repeat(block, n_ref, axis=0)
        r = np.tile(refs, (len(block), 1, 1))
        p, y, _ = deepshap_pairs(net, x, r)
        phi[start : start + len(block)] = p.reshape(len(block), n_ref, *p.shape[1:]).mean(axis=1)
        preds[start : start + len(block)] = y[::n_ref]
    return phi, preds, base_mean


def exact_shapley(
    model: Model | ForecastModel | Callable[[np.ndarray], np.ndarray],
    window: np.ndarray,
    baseline_window: np.ndarray,
) -> np.ndarray:
    """Exact Shapley values with whole channels as players.

    A channel absent from a coalition has all of its lags taken from
    ``baseline_window``. Every one of the 2**K coalitions is evaluated.
    """
    if isinstance(model, (MlpModel, LstmModel, LinearModel, ForecastModel)):
        value_fn = _net(model).predict
    else:
        value_fn = model
    x = np.asarray(window, dtype=float)
    ref = np.asarray(baseline_window, dtype=float)
    if x.shape != ref.shape or x.ndim != 2:
        raise ValueError("window and baseline must share an (N, K) shape")
    n_players = x.shape[1]
    if n_players > MAX_PLAYERS:
        raise ValueError(f"exact enumeration supports at most {MAX_PLAYERS} players, got {n_players}")
    masks = np.arange(2**n_players)
    present = ((masks[:, None] >> np.arange(n_players)[None, :]) & 1).astype(bool)
    batch = np.where(present[:, None, :], x[None], ref[None])
    values = np.asarray(value_fn(batch), dtype=float)
    sizes = present.sum(axis=1)
    fact = [math.factorial(s) for s in range(n_players + 1)]
    weight = np.array([fact[s] * fact[n_players - s - 1] / fact[n_players] for s in range(n_players)])
    phi = np.zeros(n_players)
    for k in range(n_players):
        without = masks[~present[:, k]]
        with_k = without | (1 << k)
        phi[k] = np.sum(weight[sizes[without]] * (values[with_k] - values[without]))
    return phi


@dataclass
class AttributionReport:
    mean_shap: np.ndarray
    percent: np.ndarray
    n_samples: int
    model_tag: str = ""
    score_mode: str = "abs_of_sum"
    degenerate: bool = False
    channel_names: list[str] = field(default_factory=list)

    @property
    def ranking(self) -> list[int]:
        """Channel indices by descending share; ties keep channel order."""
        return sorted(range(len(self.percent)), key=lambda k: (-self.percent[k], k))

    @property
    def entropy(self) -> float:
        return shannon_entropy(self.percent)

    def to_dict(self) -> dict:
        names = self.channel_names or [f"channel_{k + 1}" for k in range(len(self.percent))]
        return {
            "model": self.model_tag,
            "score_mode": self.score_mode,
            "samples": self.n_samples,
            "degenerate": self.degenerate,
            "entropy": self.entropy if not self.degenerate else None,
            "channels": [
                {"name": names[k], "mean_shap": float(self.mean_shap[k]), "percent": float(self.percent[k])}
                for k in range(len(self.percent))
            ],
        }


def channel_scores(phi: np.ndarray, score_mode: str = "abs_of_sum") -> np.ndarray:
    """Per-sample channel scores from (S, N, K) attributions."""
    phi = np.asarray(phi, dtype=float)
    if score_mode == "abs_of_sum":
        return np.abs(phi.sum(axis=1))
    if score_mode == "sum_of_abs":
        return np.abs(phi).sum(axis=1)
    raise ValueError(f"score_mode must be one of {SCORE_MODES}")


def aggregate_importance(
    matrices: Sequence[AttributionMatrix] | np.ndarray,
    model_tag: str = "",
    score_mode: str = "abs_of_sum",
    channel_names: Sequence[str] | None = None,
) -> AttributionReport:
    """Mean channel score over samples and each channel's percentage share."""
    if isinstance(matrices, np.ndarray):
        phi = matrices
    else:
        if len(matrices) == 0:
            raise ValueError("no attribution matrices to aggregate")
        shapes = {m.phi.shape for m in matrices}
        if len(shapes) != 1:
            raise ValueError(f"inconsistent attribution shapes {sorted(shapes)}")
        phi = np.stack([m.phi for m in matrices])
    if phi.ndim != 3 or len(phi) == 0:
        raise ValueError("expected a non-empty (S, N, K) attribution array")
    mean_shap = channel_scores(phi, score_mode).mean(axis=0)
    total = mean_shap.sum()
    degenerate = not total > 0
    percent = np.full_like(mean_shap, np.nan) if degenerate else 100.0 * mean_shap / total
    return AttributionReport(
        mean_shap=mean_shap,
        percent=percent,
        n_samples=len(phi),
        model_tag=model_tag,
        score_mode=score_mode,
        degenerate=degenerate,
        channel_names=list(channel_names or []),
    )


def shannon_entropy(percent: Sequence[float]) -> float:
    """Entropy (nats) of a percentage vector; zero shares contribute nothing."""
    p = np.asarray(percent, dtype=float) / 100.0
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))
