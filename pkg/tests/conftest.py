from __future__ import annotations

import pytest

from imfshap import fixtures
from imfshap.config import PipelineConfig


def fast_config(tmp_path, **changes) -> PipelineConfig:
    """Small, quick settings on a 600-point trend fixture."""
    csv_path = tmp_path / "fixture.csv"
    if not csv_path.exists():
        fixtures.write_ohlcv_csv(fixtures.trend_tones(600, seed=1), csv_path)
    base = dict(input=str(csv_path), window=5, background=16, mlp_epochs=8, lstm_epochs=3, hidden=16, units=4, out=str(tmp_path / "run"))
    base.update(changes)
    return PipelineConfig(**base)


@pytest.fixture
def make_config(tmp_path):
    return lambda **changes: fast_config(tmp_path, **changes)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in ACCEPTANCE:
        terminalreporter.write_line(f"criterion {criterion:<4} {status:<5} {detail}")
