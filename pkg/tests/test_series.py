from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from imfshap.series import Series, chronological_split, fit_scaler, make_windows


def test_series_rejects_bad_input():
    with pytest.raises(ValueError, match="at least 3"):
        Series.from_values([1.0, 2.0])
    with pytest.raises(ValueError, match="non-finite"):
        Series.from_values([1.0, np.nan, 2.0])
    with pytest.raises(ValueError, match="strictly increasing"):
        Series("s", (0, 2, 1), np.array([1.0, 2.0, 3.0]))


def test_series_values_are_read_only():
    s = Series.from_values([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_split_examples():
    s = chronological_split(100, 0.75)
    assert (s.train_range, s.val_range) == (range(0, 75), range(75, 100))
    # floor(0.75 * 5219) = 3914
    s = chronological_split(5219, 0.75)
    assert (s.train_range, s.val_range) == (range(0, 3914), range(3914, 5219))
    with pytest.raises(ValueError):
        chronological_split(10, 1.5)
    with pytest.raises(ValueError):
        chronological_split(5, 0.5)


@given(st.integers(8, 10_000), st.floats(0.05, 0.95))
def test_split_partitions_in_order(length, fraction):
    try:
        s = chronological_split(length, fraction)
    except ValueError:
        return
    assert s.train_range.stop == s.val_range.start
    assert len(s.train_range) + len(s.val_range) == length
    assert len(s.train_range) >= 2 and len(s.val_range) >= 2


def test_fit_scaler_examples(caplog):
    sc = fit_scaler(np.array([0.0, 1.0, 2.0, 3.0]), range(0, 4))
    assert sc.offset.tolist() == [0.0] and sc.span.tolist() == [3.0]
    m = np.array([[1.0, 10.0], [3.0, 20.0], [9.0, 99.0]])
    sc = fit_scaler(m, range(0, 2))
    assert sc.offset.tolist() == [1.0, 10.0]
    assert (sc.offset + sc.span).tolist() == [3.0, 20.0]
    assert sc.transform(m)[2].max() > 1.0  # validation rows may leave [0, 1]
    with caplog.at_level(logging.WARNING):
        sc = fit_scaler(np.array([5.0, 5.0, 5.0]), range(0, 3))
    assert "constant" in caplog.text
    assert sc.transform(np.array([[5.0]]))[0, 0] == 5.0


def test_fit_scaler_upper_bound_and_empty_range():
    m = np.arange(10.0)[:, None]
    sc = fit_scaler(m, range(0, 10), upper=0.01)
    assert sc.transform(m).max() == pytest.approx(0.01)
    with pytest.raises(ValueError):
        fit_scaler(m, range(3, 3))


@settings(max_examples=50)
@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=4, max_size=60),
    st.sampled_from([1.0, 0.01]),
)
def test_minmax_maps_train_rows_into_unit_interval(values, upper):
    m = np.asarray(values)[:, None]
    assume(np.ptp(m) > 0)  # constant channels take the identity path
    sc = fit_scaler(m, range(0, len(values)), upper=upper)
    scaled = sc.transform(m)
    assert scaled.min() >= -1e-12 and scaled.max() <= upper * (1 + 1e-9)
    np.testing.assert_allclose(sc.inverse_transform(scaled), m, rtol=1e-9, atol=1e-6)


def test_make_windows_examples():
    m = np.array([1.0, 2.0, 3.0, 4.0])
    ds = make_windows(m, m, range(0, 4), 2)
    assert ds.inputs[:, :, 0].tolist() == [[1, 2], [2, 3]]
    assert ds.targets.tolist() == [3, 4]
    ds = make_windows(m, m, range(0, 4), 3)
    assert ds.inputs[:, :, 0].tolist() == [[1, 2, 3]] and ds.targets.tolist() == [4]
    with pytest.raises(ValueError):
        make_windows(m, m, range(0, 4), 5)


@given(st.integers(20, 80), st.integers(1, 6), st.integers(0, 10))
def test_windows_never_leak_the_target(length, window, start):
    m = np.arange(float(length))
    ds = make_windows(m, m, range(start, length), window)
    for s in range(len(ds)):
        t = ds.sample_time_index[s]
        assert ds.inputs[s, -1, 0] == t - 1 and ds.inputs[s, 0, 0] >= start
        assert ds.targets[s] == t


@settings(max_examples=40)
@given(st.integers(0, 10_000), st.integers(10, 60), st.integers(1, 4))
def test_scaler_ignores_rows_outside_the_fit_range(seed, length, k):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(length, k)) * rng.uniform(0.1, 100, size=k)
    cut = length // 2
    full = fit_scaler(m, range(0, cut))
    only_train = fit_scaler(m[:cut], range(0, cut))
    assert full.offset.tobytes() == only_train.offset.tobytes()
    assert full.span.tobytes() == only_train.span.tobytes()
    back = full.inverse_transform(full.transform(m))
    np.testing.assert_allclose(back, m, rtol=1e-12, atol=1e-12 * np.abs(m).max())
