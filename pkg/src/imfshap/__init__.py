"""EMD channel decomposition, numpy MLP/LSTM forecasters and DeepSHAP channel attribution."""

from __future__ import annotations

__version__ = "0.1.0"
