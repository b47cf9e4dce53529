from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imfshap.attribution import (
    aggregate_importance,
    deepshap,
    deepshap_batch,
    draw_baselines,
    exact_shapley,
    product_split,
    rescale_multiplier,
    shannon_entropy,
)
from imfshap.nn.models import LinearModel, MlpModel, init_lstm, init_mlp


def test_rescale_multiplier_examples():
    assert rescale_multiplier(1.0, 0.0, math.tanh(1.0), 0.0) == pytest.approx(0.7615941559557649, abs=1e-15)
    assert rescale_multiplier(0.0, 0.0, 0.0, 0.0) == 1.0
    w = 2.5
    for x, r in ((1.0, 3.0), (-4.0, 0.5)):
        assert rescale_multiplier(x, r, w * x, w * r, "linear") == pytest.approx(w)


def test_product_split_examples():
    pu, pv = product_split(3.0, 1.0, 4.0, 2.0)
    assert (pu, pv) == (6.0, 4.0) and pu + pv == 3.0 * 4.0 - 1.0 * 2.0
    assert product_split(2.0, 2.0, 5.0, 1.0)[0] == 0.0
    a, b = product_split(1.5, 0.5, 1.5, 0.5)
    assert a == b


@given(*(st.floats(-10, 10) for _ in range(4)))
def test_product_split_sums_to_delta(u, ur, v, vr):
    pu, pv = product_split(u, ur, v, vr)
    assert pu + pv == pytest.approx(u * v - ur * vr, abs=1e-9)


def test_linear_closed_form():
    rng = np.random.default_rng(0)
    w = rng.normal(size=(4, 3))
    lin = LinearModel({"w": w, "b": np.asarray(0.4)}, 4, 3)
    x, ref = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    np.testing.assert_allclose(deepshap(lin, x, ref).phi, w * (x - ref), atol=1e-12)
    np.testing.assert_allclose(exact_shapley(lin, x, ref), (w * (x - ref)).sum(axis=0), atol=1e-12)


def test_missingness():
    for model in (init_mlp(3, 2, 5), init_lstm(3, 2, 4)):
        x = np.random.default_rng(1).normal(size=(3, 2))
        assert np.all(deepshap(model, x, x).phi == 0.0)


def test_tiny_mlp_local_accuracy():
    rng = np.random.default_rng(5)
    m = MlpModel({"W1": rng.normal(size=(3, 2)), "b1": rng.normal(size=2), "W2": rng.normal(size=2), "b2": np.asarray(0.1)}, 3, 1)
    x, ref = rng.normal(size=(3, 1)), rng.normal(size=(3, 1))
    attr = deepshap(m, x, ref)
    assert attr.phi.sum() == pytest.approx(m.predict(x[None])[0] - m.predict(ref[None])[0], abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(["mlp", "lstm"]))
def test_summation_to_delta_per_baseline(seed, kind):
    rng = np.random.default_rng(seed)
    n, k = int(rng.integers(1, 6)), int(rng.integers(1, 5))
    model = init_mlp(n, k, 6, rng) if kind == "mlp" else init_lstm(n, k, 4, rng)
    x = rng.normal(size=(n, k))
    refs = rng.normal(size=(3, n, k))
    attr = deepshap(model, x, refs, keep_per_baseline=True)
    deltas = model.predict(x[None])[0] - model.predict(refs)
    np.testing.assert_allclose(attr.per_baseline.sum(axis=(1, 2)), deltas, atol=1e-10)
    assert attr.phi.sum() == pytest.approx(attr.delta, abs=1e-10)


def test_batch_matches_single():
    rng = np.random.default_rng(2)
    model = init_lstm(4, 3, 5, rng)
    windows, refs = rng.normal(size=(7, 4, 3)), rng.normal(size=(5, 4, 3))
    phi, preds, base = deepshap_batch(model, windows, refs, chunk_pairs=12)
    for s in range(7):
        single = deepshap(model, windows[s], refs)
        np.testing.assert_allclose(phi[s], single.phi, atol=1e-12)
        assert preds[s] == pytest.approx(single.prediction, abs=1e-12)
    assert base == pytest.approx(model.predict(refs).mean(), abs=1e-12)


def test_exact_shapley_hand_product():
    f = lambda b: b[:, 0, 0] * b[:, 0, 1]  # noqa: E731
    phi = exact_shapley(f, np.array([[2.0, 3.0]]), np.zeros((1, 2)))
    np.testing.assert_allclose(phi, [3.0, 3.0], atol=1e-15)


def test_exact_shapley_additive_and_dummy():
    g = [np.sin, np.square, lambda v: 0.0 * v]
    f = lambda b: sum(g[k](b[:, :, k]).sum(axis=1) for k in range(3))  # noqa: E731
    rng = np.random.default_rng(3)
    x, ref = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
    expected = [g[k](x[:, k]).sum() - g[k](ref[:, k]).sum() for k in range(3)]
    phi = exact_shapley(f, x, ref)
    np.testing.assert_allclose(phi, expected, atol=1e-12)
    assert phi[2] == 0.0


def brute_force_shapley(f, x, ref):
    """Permutation-average definition, independent of the coalition-weight formula."""
    k = x.shape[1]
    phi = np.zeros(k)
    perms = list(itertools.permutations(range(k)))
    for order in perms:
        cur = ref.copy()
        prev = f(cur[None])[0]
        for p in order:
            cur[:, p] = x[:, p]
            val = f(cur[None])[0]
            phi[p] += val - prev
            prev = val
    return phi / len(perms)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 5))
def test_exact_shapley_matches_permutation_definition_and_efficiency(seed, k):
    rng = np.random.default_rng(seed)
    model = init_mlp(2, k, 5, rng)
    x, ref = rng.normal(size=(2, k)), rng.normal(size=(2, k))
    phi = exact_shapley(model, x, ref)
    np.testing.assert_allclose(phi, brute_force_shapley(model.predict, x, ref), atol=1e-12)
    assert phi.sum() == pytest.approx(model.predict(x[None])[0] - model.predict(ref[None])[0], abs=1e-12)


def test_exact_shapley_player_limit():
    with pytest.raises(ValueError):
        exact_shapley(lambda b: b.sum(axis=(1, 2)), np.zeros((1, 16)), np.zeros((1, 16)))


def test_aggregate_examples():
    phi = np.array([[[1.0, 2.0], [1.0, 0.0]]])
    r = aggregate_importance(phi)
    np.testing.assert_allclose(r.percent, [50.0, 50.0])
    phi = np.array([[[1.0, 0.0]], [[3.0, 0.0]]])
    r = aggregate_importance(phi)
    np.testing.assert_allclose(r.mean_shap, [2.0, 0.0])
    np.testing.assert_allclose(r.percent, [100.0, 0.0])
    assert r.ranking == [0, 1]


def test_aggregate_degenerate_and_modes():
    r = aggregate_importance(np.zeros((3, 2, 2)))
    assert r.degenerate and np.all(np.isnan(r.percent))
    phi = np.array([[[1.0], [-1.0]]])
    assert aggregate_importance(phi, score_mode="abs_of_sum").mean_shap[0] == 0.0
    assert aggregate_importance(phi, score_mode="sum_of_abs").mean_shap[0] == 2.0
    with pytest.raises(ValueError):
        aggregate_importance(phi, score_mode="max")


@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=12))
def test_percents_sum_to_100(shares):
    phi = np.asarray(shares)[None, None, :]
    r = aggregate_importance(phi)
    if r.degenerate:
        return
    assert r.percent.sum() == pytest.approx(100.0)
    assert np.all(r.percent >= 0)


def test_entropy():
    assert shannon_entropy([100.0, 0.0]) == 0.0
    assert shannon_entropy([25.0] * 4) == pytest.approx(math.log(4))


def test_baselines_are_seeded_training_windows():
    train_inputs = np.arange(50.0).reshape(50, 1, 1)
    a = draw_baselines(train_inputs, 10, seed=4)
    b = draw_baselines(train_inputs, 10, seed=4)
    assert a.source_index.tolist() == b.source_index.tolist()
    assert len(set(a.source_index.tolist())) == 10
    np.testing.assert_array_equal(a.windows[:, 0, 0], a.source_index)
    assert len(draw_baselines(train_inputs, 80, seed=4)) == 80


@given(st.floats(1e-3, 1e3), st.integers(0, 1000))
def test_percent_is_scale_covariant(c, seed):
    phi = np.random.default_rng(seed).normal(size=(5, 3, 4))
    np.testing.assert_allclose(aggregate_importance(c * phi).percent, aggregate_importance(phi).percent, rtol=1e-9)


def test_lstm_has_no_state_between_calls():
    model = init_lstm(4, 2, 3, np.random.default_rng(0))
    rng = np.random.default_rng(1)
    x, other = rng.normal(size=(4, 2)), rng.normal(size=(6, 4, 2))
    alone = model.predict(x[None])[0]
    model.predict(other)
    assert model.predict(x[None])[0] == alone
    assert model.predict(np.concatenate([other, x[None]]))[-1] == pytest.approx(alone, abs=1e-15)
