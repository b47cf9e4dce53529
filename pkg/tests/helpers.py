"""Shared oracles for the test modules."""

from __future__ import annotations

import numpy as np

from imfshap.nn.models import backward, mse_loss


def finite_difference_check(model, inputs, targets, step=1e-5, rtol=1e-4, floor=1e-7):
    """Largest violation of ``|analytic - numeric| <= rtol * max(|numeric|, floor)`` over all parameters.

    Returns (worst ratio, number of entries checked); a ratio <= 1 passes.
    """
    _, grads = backward(model, inputs, targets)
    worst, count = 0.0, 0
    for name, p in model.params.items():
        flat = p.reshape(-1) if p.ndim else None
        for j in range(p.size):
            if p.ndim == 0:
                orig = float(p)
                model.params[name] = np.asarray(orig + step)
                up = mse_loss(model, inputs, targets)
                model.params[name] = np.asarray(orig - step)
                down = mse_loss(model, inputs, targets)
                model.params[name] = np.asarray(orig)
                analytic = float(grads[name])
            else:
                orig = flat[j]
                flat[j] = orig + step
                up = mse_loss(model, inputs, targets)
                flat[j] = orig - step
                down = mse_loss(model, inputs, targets)
                flat[j] = orig
                analytic = grads[name].reshape(-1)[j]
            numeric = (up - down) / (2 * step)
            worst = max(worst, abs(analytic - numeric) / (rtol * max(abs(numeric), floor)))
            count += 1
    return worst, count


def seeded_gradcheck_models(seed=0):
    """The MLP (3 inputs, 4 hidden) and LSTM (K=2, U=3, N=3) used for gradient checks, with data."""
    from imfshap.nn.models import init_lstm, init_mlp

    rng = np.random.default_rng(seed)
    mlp = init_mlp(3, 1, hidden=4, rng=rng)
    mlp.params["b1"] = rng.normal(scale=0.3, size=4)
    mlp.params["b2"] = np.asarray(0.1)
    mlp_x, mlp_y = rng.normal(size=(6, 3, 1)), rng.normal(size=6)
    lstm = init_lstm(3, 2, units=3, rng=rng)
    lstm.params["b"] = lstm.params["b"] + rng.normal(scale=0.3, size=12)
    lstm.params["b_out"] = np.asarray(-0.2)
    lstm_x, lstm_y = rng.normal(size=(5, 3, 2)), rng.normal(size=5)
    return (mlp, mlp_x, mlp_y), (lstm, lstm_x, lstm_y)


# acceptance bookkeeping: one line per criterion, printed in the terminal summary
ACCEPTANCE: list[tuple[str, str, str]] = []


def record(criterion: str, status: str, detail: str = "") -> None:
    ACCEPTANCE.append((criterion, status, detail))


def check(criterion: str, ok: bool, detail: str) -> None:
    record(criterion, "PASS" if ok else "FAIL", detail)
    assert ok, f"criterion {criterion}: {detail}"
