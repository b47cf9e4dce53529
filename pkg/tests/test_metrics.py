from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imfshap.metrics import compute_metrics


def test_perfect_forecast():
    m = compute_metrics([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert (m.mse, m.rmse, m.mae, m.mape, m.r2) == (0.0, 0.0, 0.0, 0.0, 1.0)


def test_mean_predictor_hand_values():
    m = compute_metrics([1.0, 2.0, 3.0], [2.0, 2.0, 2.0])
    assert m.mse == pytest.approx(2 / 3, abs=1e-15)
    assert m.rmse == pytest.approx(math.sqrt(2 / 3), abs=1e-15)
    assert m.mae == pytest.approx(2 / 3, abs=1e-15)
    assert m.mape == pytest.approx(100 * (1 + 0 + 1 / 3) / 3, abs=1e-12)  # 44.44 %
    assert m.r2 == pytest.approx(0.0, abs=1e-15)
    assert m.to_dict()["display"]["mape"] == "44.444"


def test_guards():
    m = compute_metrics([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    assert m.r2 is None and "r2" in m.omitted
    assert m.mape is None and m.omitted["mape"] == "constant targets"
    m = compute_metrics([0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
    assert m.mape is None and "mape" in m.omitted and m.r2 == 1.0
    with pytest.raises(ValueError):
        compute_metrics([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        compute_metrics([], [])
    with pytest.raises(ValueError):
        compute_metrics([1.0, np.inf], [1.0, 2.0])


@given(st.lists(st.tuples(st.floats(1, 100), st.floats(-50, 50)), min_size=3, max_size=40))
def test_metric_relations(pairs):
    y = np.array([p[0] for p in pairs])
    yhat = y + np.array([p[1] for p in pairs])
    m = compute_metrics(y, yhat)
    assert m.rmse == pytest.approx(math.sqrt(m.mse))
    assert m.mae <= m.rmse + 1e-9
    if m.r2 is not None:
        assert m.r2 <= 1.0 + 1e-12


@given(
    st.lists(st.tuples(st.floats(1, 100), st.floats(-5, 5)), min_size=3, max_size=30),
    st.floats(1.0, 1e3),
)
def test_shift_invariance(pairs, shift):
    y = np.array([p[0] for p in pairs])
    yhat = y + np.array([p[1] for p in pairs])
    a, b = compute_metrics(y, yhat), compute_metrics(y + shift, yhat + shift)
    assert b.mse == pytest.approx(a.mse, rel=1e-6, abs=1e-9)
    assert b.mae == pytest.approx(a.mae, rel=1e-6, abs=1e-9)
    if a.mape is not None and np.max(np.abs(yhat - y)) > 1e-3:
        assert b.mape != pytest.approx(a.mape, rel=1e-9)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40))
def test_mean_predictor_has_zero_r2(values):
    y = np.asarray(values)
    m = compute_metrics(y, np.full_like(y, y.mean()))
    if m.r2 is not None:
        assert abs(m.r2) <= 1e-12
