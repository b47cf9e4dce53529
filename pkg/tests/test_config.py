from __future__ import annotations

import pytest

from imfshap.config import PipelineConfig


def test_text_round_trip():
    cfg = PipelineConfig(input="x.csv", model="both", window=7, exclude_imfs=(3, 1), plots=False, scale_upper=0.5)
    back = PipelineConfig.from_text(cfg.to_text())
    assert back == cfg
    assert back.exclude_imfs == (1, 3)


def test_comments_and_unknown_keys():
    cfg = PipelineConfig.from_text("# run\nwindow = 12  # lags\n\nmodel = lstm\n")
    assert cfg.window == 12 and cfg.model == "lstm"
    with pytest.raises(ValueError, match="unknown key"):
        PipelineConfig.from_text("windw = 3\n")
    with pytest.raises(ValueError, match="cannot parse"):
        PipelineConfig.from_text("window = ten\n")
    with pytest.raises(ValueError):
        PipelineConfig.from_text("model = gru\n")


def test_digest_ignores_locations_only():
    a = PipelineConfig(input="a.csv", out="x")
    assert a.digest() == PipelineConfig(input="b.csv", out="y").digest()
    assert a.digest() != PipelineConfig(seed=1).digest()


def test_sub_configs():
    cfg = PipelineConfig(max_imfs=5, lstm_epochs=7, seed=9)
    assert cfg.sift_config().max_imfs == 5
    assert cfg.train_config("lstm").max_epochs == 7 and cfg.train_config("mlp").max_epochs == 50
    assert cfg.train_config("mlp").seed == 9
    assert PipelineConfig(model="both").model_kinds == ("mlp", "lstm")
