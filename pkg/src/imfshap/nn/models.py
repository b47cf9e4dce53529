"""Dense MLP and single-layer LSTM forecasters in plain numpy.

Both networks map a window of shape (N, K) to one scalar. The backward passes
take the per-node local factors as an argument: the true derivatives give
ordinary gradients, while DeepLIFT multipliers (see ``imfshap.attribution``)
give attributions through exactly the same propagation code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GATES = ("i", "f", "o", "g")


def logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, ...] | None = None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


@dataclass
class MlpModel:
    """One tanh hidden layer and a linear scalar output.

    Parameters: ``W1`` (N*K, H), ``b1`` (H,), ``W2`` (H,), ``b2`` (0-d).
    Windows are flattened row-major, lag-major then channel.
    """

    params: dict[str, np.ndarray]
    window: int
    channels: int
    kind: str = field(default="mlp", init=False)

    @property
    def hidden(self) -> int:
        return self.params["b1"].shape[0]

    @property
    def input_size(self) -> int:
        return self.window * self.channels

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return mlp_forward_batch(self, inputs)[0]

    def copy(self) -> MlpModel:
        return MlpModel({k: v.copy() for k, v in self.params.items()}, self.window, self.channels)


@dataclass
class LstmModel:
    """A single LSTM layer followed by a dense scalar head.

    Gate weights are stored side by side in gate order i, f, o, g:
    ``W`` (K, 4U) input weights, ``U`` (U, 4U) recurrent weights, ``b`` (4U,),
    then ``w_out`` (U,) and ``b_out`` (0-d).
    """

    params: dict[str, np.ndarray]
    window: int
    channels: int
    kind: str = field(default="lstm", init=False)

    @property
    def units(self) -> int:
        return self.params["U"].shape[0]

    def gate_slice(self, gate: str) -> slice:
        k = GATES.index(gate)
        return slice(k * self.units, (k + 1) * self.units)

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return lstm_forward_batch(self, inputs)[0]

    def copy(self) -> LstmModel:
        return LstmModel({k: v.copy() for k, v in self.params.items()}, self.window, self.channels)


@dataclass
class LinearModel:
    """``y = sum(w * window) + b``; a reference model for attribution checks."""

    params: dict[str, np.ndarray]
    window: int
    channels: int
    kind: str = field(default="linear", init=False)

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return linear_forward_batch(self, inputs)[0]

    def copy(self) -> LinearModel:
        return LinearModel({k: v.copy() for k, v in self.params.items()}, self.window, self.channels)


Model = MlpModel | LstmModel | LinearModel


def init_mlp(window: int, channels: int, hidden: int = 64, rng: np.random.Generator | None = None) -> MlpModel:
    rng = rng if rng is not None else np.random.default_rng(0)
    d = window * channels
    params = {
        "W1": glorot_uniform(rng, d, hidden),
        "b1": np.zeros(hidden),
        "W2": glorot_uniform(rng, hidden, 1, (hidden,)),
        "b2": np.zeros(()),
    }
    return MlpModel(params, window, channels)


def init_lstm(
    window: int, channels: int, units: int = 10, rng: np.random.Generator | None = None, forget_bias: float = 1.0
) -> LstmModel:
    rng = rng if rng is not None else np.random.default_rng(0)
    b = np.zeros(4 * units)
    b[units : 2 * units] = forget_bias
    params = {
        "W": glorot_uniform(rng, channels, 4 * units),
        "U": glorot_uniform(rng, units, 4 * units),
        "b": b,
        "w_out": glorot_uniform(rng, units, 1, (units,)),
        "b_out": np.zeros(()),
    }
    return LstmModel(params, window, channels)


def _as_batch(model: Model, inputs: np.ndarray) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 2 and x.shape == (model.window, model.channels):
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != (model.window, model.channels):
        raise ValueError(f"expected windows of shape (B, {model.window}, {model.channels}), got {x.shape}")
    return x


# -- MLP ----------------------------------------------------------------------


def mlp_forward(model: MlpModel, window: np.ndarray) -> float:
    """Forecast from one window, given as (N, K) or flattened to N*K values."""
    x = np.asarray(window, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != model.input_size:
            raise ValueError(f"expected {model.input_size} inputs, got {x.shape[0]}")
        x = x.reshape(model.window, model.channels)
    return float(mlp_forward_batch(model, x)[0][0])


def mlp_forward_batch(model: MlpModel, inputs: np.ndarray) -> tuple[np.ndarray, dict]:
    x = _as_batch(model, inputs)
    p = model.params
    xf = x.reshape(len(x), -1)
    z = xf @ p["W1"] + p["b1"]
    a = np.tanh(z)
    y = a @ p["W2"] + p["b2"]
    return y, {"x": x, "xf": xf, "z": z, "a": a, "y": y}


def mlp_gradient_factors(cache: dict) -> dict:
    return {"slope": 1.0 - cache["a"] ** 2}


def mlp_backward(
    model: MlpModel, cache: dict, dy: np.ndarray, factors: dict | None = None, param_grads: bool = True
) -> tuple[dict[str, np.ndarray] | None, np.ndarray]:
    """Propagate ``dy`` (one value per batch row) back to the parameters and inputs."""
    p = model.params
    factors = factors if factors is not None else mlp_gradient_factors(cache)
    dz = dy[:, None] * p["W2"][None, :] * factors["slope"]
    dx = (dz @ p["W1"].T).reshape(cache["x"].shape)
    if not param_grads:
        return None, dx
    grads = {
        "W1": cache["xf"].T @ dz,
        "b1": dz.sum(axis=0),
        "W2": cache["a"].T @ dy,
        "b2": np.asarray(dy.sum()),
    }
    return grads, dx


# -- LSTM ---------------------------------------------------------------------


def lstm_step(model: LstmModel, x_t: np.ndarray, h: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One recurrence step; accepts single vectors or batches of rows."""
    p = model.params
    x_t, h, c = (np.asarray(v, dtype=float) for v in (x_t, h, c))
    if x_t.shape[-1] != model.channels or h.shape[-1] != model.units or c.shape[-1] != model.units:
        raise ValueError("lstm_step input shapes do not match the model")
    z = x_t @ p["W"] + h @ p["U"] + p["b"]
    u = model.units
    i = logistic(z[..., :u])
    f = logistic(z[..., u : 2 * u])
    o = logistic(z[..., 2 * u : 3 * u])
    g = np.tanh(z[..., 3 * u :])
    c_new = f * c + i * g
    return o * np.tanh(c_new), c_new


def lstm_forward(model: LstmModel, window: np.ndarray) -> float:
    """Forecast from one (N, K) window, starting from zero state."""
    return float(lstm_forward_batch(model, window)[0][0])


def lstm_forward_batch(model: LstmModel, inputs: np.ndarray) -> tuple[np.ndarray, dict]:
    x = _as_batch(model, inputs)
    p = model.params
    n_batch, n_steps, _ = x.shape
    u = model.units
    keys = ("h_prev", "c_prev", "i", "f", "o", "g", "c", "tc", "h")
    cache = {k: np.empty((n_batch, n_steps, u)) for k in keys}
    cache["z"] = np.empty((n_batch, n_steps, 4 * u))
    cache["x"] = x
    h = np.zeros((n_batch, u))
    c = np.zeros((n_batch, u))
    # input projections for all steps at once
    xw = x @ p["W"] + p["b"]
    for t in range(n_steps):
        z = xw[:, t] + h @ p["U"]
        i = logistic(z[:, :u])
        f = logistic(z[:, u : 2 * u])
        o = logistic(z[:, 2 * u : 3 * u])
        g = np.tanh(z[:, 3 * u :])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        for k, v in (("h_prev", h), ("c_prev", c), ("i", i), ("f", f), ("o", o), ("g", g), ("c", c_new), ("tc", tc), ("h", h_new)):
            cache[k][:, t] = v
        cache["z"][:, t] = z
        h, c = h_new, c_new
    y = h @ p["w_out"] + p["b_out"]
    cache["y"] = y
    return y, cache


def lstm_gradient_factors(cache: dict) -> dict:
    """Local derivatives of every nonlinear node and product in the unrolled graph."""
    i, f, o, g, tc = cache["i"], cache["f"], cache["o"], cache["g"], cache["tc"]
    return {
        "di": i * (1.0 - i),
        "df": f * (1.0 - f),
        "do": o * (1.0 - o),
        "dg": 1.0 - g**2,
        "dtc": 1.0 - tc**2,
        "c_by_f": cache["c_prev"],
        "c_by_cprev": f,
        "c_by_i": g,
        "c_by_g": i,
        "h_by_o": tc,
        "h_by_tc": o,
    }


def lstm_backward(
    model: LstmModel, cache: dict, dy: np.ndarray, factors: dict | None = None, param_grads: bool = True
) -> tuple[dict[str, np.ndarray] | None, np.ndarray]:
    """Backpropagation through time over the cached window."""
    p = model.params
    fac = factors if factors is not None else lstm_gradient_factors(cache)
    x = cache["x"]
    n_batch, n_steps, _ = x.shape
    u = model.units
    dh = dy[:, None] * p["w_out"][None, :]
    dc = np.zeros((n_batch, u))
    dz_all = np.empty((n_batch, n_steps, 4 * u))
    for t in range(n_steps - 1, -1, -1):
        d_o = dh * fac["h_by_o"][:, t]
        dc = dc + dh * fac["h_by_tc"][:, t] * fac["dtc"][:, t]
        dz = dz_all[:, t]
        dz[:, :u] = dc * fac["c_by_i"][:, t] * fac["di"][:, t]
        dz[:, u : 2 * u] = dc * fac["c_by_f"][:, t] * fac["df"][:, t]
        dz[:, 2 * u : 3 * u] = d_o * fac["do"][:, t]
        dz[:, 3 * u :] = dc * fac["c_by_g"][:, t] * fac["dg"][:, t]
        dc = dc * fac["c_by_cprev"][:, t]
        dh = dz @ p["U"].T
    dx = dz_all @ p["W"].T
    if not param_grads:
        return None, dx
    flat_dz = dz_all.reshape(-1, 4 * u)
    grads = {
        "W": x.reshape(-1, x.shape[2]).T @ flat_dz,
        "U": cache["h_prev"].reshape(-1, u).T @ flat_dz,
        "b": flat_dz.sum(axis=0),
        "w_out": cache["h"][:, -1].T @ dy,
        "b_out": np.asarray(dy.sum()),
    }
    return grads, dx


# -- linear -------------------------------------------------------------------


def linear_forward_batch(model: LinearModel, inputs: np.ndarray) -> tuple[np.ndarray, dict]:
    x = _as_batch(model, inputs)
    y = np.einsum("bnk,nk->b", x, model.params["w"]) + model.params["b"]
    return y, {"x": x, "y": y}


def linear_backward(
    model: LinearModel, cache: dict, dy: np.ndarray, factors: dict | None = None, param_grads: bool = True
) -> tuple[dict[str, np.ndarray] | None, np.ndarray]:
    dx = dy[:, None, None] * model.params["w"][None]
    if not param_grads:
        return None, dx
    return {"w": np.einsum("b,bnk->nk", dy, cache["x"]), "b": np.asarray(dy.sum())}, dx


# -- shared -------------------------------------------------------------------


def forward_batch(model: Model, inputs: np.ndarray) -> tuple[np.ndarray, dict]:
    if isinstance(model, MlpModel):
        return mlp_forward_batch(model, inputs)
    if isinstance(model, LinearModel):
        return linear_forward_batch(model, inputs)
    return lstm_forward_batch(model, inputs)


def backward_batch(model: Model, cache: dict, dy: np.ndarray, factors: dict | None = None, param_grads: bool = True):
    if isinstance(model, MlpModel):
        return mlp_backward(model, cache, dy, factors, param_grads)
    if isinstance(model, LinearModel):
        return linear_backward(model, cache, dy, factors, param_grads)
    return lstm_backward(model, cache, dy, factors, param_grads)


def mse_loss(model: Model, inputs: np.ndarray, targets: np.ndarray) -> float:
    y = model.predict(inputs)
    return float(np.mean((y - np.asarray(targets, dtype=float)) ** 2))


def backward(model: Model, inputs: np.ndarray, targets: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss over the batch and its gradient for every parameter."""
    targets = np.asarray(targets, dtype=float)
    if len(targets) == 0:
        raise ValueError("empty batch")
    y, cache = forward_batch(model, inputs)
    resid = y - targets
    grads, _ = backward_batch(model, cache, 2.0 * resid / len(targets))
    return float(np.mean(resid**2)), grads
