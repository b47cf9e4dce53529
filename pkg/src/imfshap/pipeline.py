"""CSV ingestion, stage orchestration (decompose, train, predict, explain, ablate) and run artifacts."""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .attribution import AttributionReport, aggregate_importance, deepshap_batch, draw_baselines
from .config import PipelineConfig
from .emd import Decomposition, decompose
from .metrics import MetricsBundle, compute_metrics
from .nn import checkpoint
from .nn.train import ForecastModel, TrainHistory, build_model, predict_series, train
from .series import Scaler, Series, SplitSpec, WindowedDataset, chronological_split, fit_scaler, make_windows

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class StageError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


# -- input --------------------------------------------------------------------


def load_csv(path: str | Path, column: str = "Close") -> Series:
    """Read one numeric column of a daily ``Date,Open,High,Low,Close,...`` file.

    Dates must be ISO ``YYYY-MM-DD`` and strictly increasing; extra columns are
    ignored. Error messages give the 1-based line number in the file.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        if column not in header:
            raise ValueError(f"{path}: no column {column!r}; available columns: {', '.join(header)}")
        if "Date" not in header:
            raise ValueError(f"{path}: no 'Date' column; available columns: {', '.join(header)}")
        date_col, value_col = header.index("Date"), header.index(column)
        stamps: list[str] = []
        values: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                stamp = dt.date.fromisoformat(row[date_col].strip()).isoformat()
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{line_no}: cannot parse date {row[date_col:date_col + 1]}") from exc
            try:
                value = float(row[value_col])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{line_no}: cannot parse {column} value {row[value_col:value_col + 1]}") from exc
            if not np.isfinite(value):
                raise ValueError(f"{path}:{line_no}: non-finite {column} value")
            if stamps and stamp <= stamps[-1]:
                raise ValueError(f"{path}:{line_no}: non-increasing date {stamp} after {stamps[-1]}")
            stamps.append(stamp)
            values.append(value)
    if len(values) < 3:
        raise ValueError(f"{path}: need at least 3 data rows, got {len(values)}")
    return Series(name=path.stem, timestamps=tuple(stamps), values=np.asarray(values))


# -- decomposition file -------------------------------------------------------


def channel_names(num_imfs: int, include_residual: bool = True) -> list[str]:
    return [f"imf_{k + 1}" for k in range(num_imfs)] + (["residual"] if include_residual else [])


def write_decomposition_csv(path: str | Path, series: Series, decomposition: Decomposition) -> Path:
    path = Path(path)
    names = channel_names(decomposition.num_imfs)
    matrix = np.column_stack([series.values, decomposition.channels()])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "original", *names])
        for stamp, row in zip(series.timestamps, matrix):
            writer.writerow([stamp, *("%.17g" % v for v in row)])
    return path


def read_decomposition_csv(path: str | Path, name: str | None = None) -> tuple[Series, np.ndarray, list[str]]:
    """Inverse of :func:`write_decomposition_csv`: (series, channel matrix, channel names)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["t", "original"] or len(header) < 3:
            raise ValueError(f"{path}: not a decomposition file (header {header[:3]})")
        stamps, rows = [], []
        for row in reader:
            stamps.append(row[0])
            rows.append([float(v) for v in row[1:]])
    if all(s.lstrip("-").isdigit() for s in stamps):
        stamps = [int(s) for s in stamps]
    data = np.asarray(rows, dtype=float)
    series = Series(name=name or path.stem, timestamps=tuple(stamps), values=data[:, 0])
    return series, data[:, 1:], header[2:]


# -- stages ---------------------------------------------------------------------


@dataclass
class PreparedData:
    series: Series
    channel_names: list[str]
    channel_ids: list[int]
    split: SplitSpec
    input_scaler: Scaler
    target_scaler: Scaler
    train: WindowedDataset
    val: WindowedDataset

    @property
    def kept_names(self) -> list[str]:
        return [self.channel_names[k] for k in self.channel_ids]


def prepare(
    series: Series, channels: np.ndarray, names: Sequence[str], config: PipelineConfig, exclude: Sequence[int] = ()
) -> PreparedData:
    """Split, scale and window the channel matrix. ``exclude`` holds 1-based channel numbers."""
    channels = np.asarray(channels, dtype=float)
    names = list(names)
    if not config.include_residual:
        # the residual is always the last channel
        channels, names = channels[:, :-1], names[:-1]
    n_channels = channels.shape[1]
    bad = [k for k in exclude if not 1 <= k <= n_channels]
    if bad:
        raise ValueError(f"cannot exclude channel(s) {bad}: there are {n_channels} channels")
    kept = [k for k in range(n_channels) if k + 1 not in set(exclude)]
    if not kept:
        raise ValueError("every channel is excluded")
    split = chronological_split(len(series), config.split)
    input_scaler = fit_scaler(channels, split.train_range, config.scaler, config.scale_upper).select(kept)
    target_scaler = fit_scaler(series.values, split.train_range, config.scaler, config.scale_upper)
    scaled = input_scaler.transform(channels[:, kept])
    return PreparedData(
        series=series,
        channel_names=names,
        channel_ids=kept,
        split=split,
        input_scaler=input_scaler,
        target_scaler=target_scaler,
        train=make_windows(scaled, series, split.train_range, config.window, target_scaler),
        val=make_windows(scaled, series, split.val_range, config.window, target_scaler),
    )


def fit_forecaster(kind: str, data: PreparedData, config: PipelineConfig) -> tuple[ForecastModel, TrainHistory]:
    tc = config.train_config(kind)
    net = build_model(kind, config.window, len(data.channel_ids), config.seed, config.hidden, config.units)
    net, history = train(net, data.train, tc)
    return ForecastModel(net, tc, data.input_scaler, data.target_scaler, list(data.channel_ids)), history


def evaluate(model: ForecastModel, data: PreparedData) -> tuple[np.ndarray, MetricsBundle]:
    preds = predict_series(model, data.val)
    return preds, compute_metrics(data.val.raw_targets, preds)


def explain(model: ForecastModel, data: PreparedData, config: PipelineConfig) -> tuple[AttributionReport, np.ndarray]:
    """DeepSHAP over every validation window against seeded training baselines."""
    baselines = draw_baselines(data.train.inputs, config.background, config.seed)
    phi, _, _ = deepshap_batch(model, data.val.inputs, baselines)
    report = aggregate_importance(phi, model.kind, config.score_mode, data.kept_names)
    return report, phi


@dataclass
class ModelResult:
    kind: str
    model: ForecastModel
    history: TrainHistory
    predictions: np.ndarray
    metrics: MetricsBundle
    report: AttributionReport


def run_model(kind: str, data: PreparedData, config: PipelineConfig) -> ModelResult:
    model, history = fit_forecaster(kind, data, config)
    preds, metrics = evaluate(model, data)
    report, _ = explain(model, data, config)
    return ModelResult(kind, model, history, preds, metrics, report)


def ablation_mse_change(
    series: Series, channels: np.ndarray, names: Sequence[str], config: PipelineConfig, kind: str, exclude: Sequence[int], full_mse: float
) -> tuple[float, ModelResult]:
    """Retrain without ``exclude`` and return (ablated MSE - full MSE, ablated result)."""
    data = prepare(series, channels, names, config, exclude)
    result = run_model(kind, data, config)
    return result.metrics.mse - full_mse, result


# -- artifacts ----------------------------------------------------------------


@dataclass
class RunArtifacts:
    out_dir: Path
    files: dict[str, Path] = field(default_factory=dict)
    results: dict[str, ModelResult] = field(default_factory=dict)
    ablation: dict[str, ModelResult] = field(default_factory=dict)
    channel_names: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)


def _dump_json(path: Path, data: dict) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=False, allow_nan=False) + "\n")
    return path


def write_predictions_csv(path: Path, data: PreparedData, preds: np.ndarray) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "actual", "predicted"])
        for ti, actual, pred in zip(data.val.sample_time_index, data.val.raw_targets, preds):
            writer.writerow([data.series.timestamps[ti], "%.17g" % actual, "%.17g" % pred])
    return path


def read_predictions_csv(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = list(reader)
    return [r[0] for r in rows], np.array([float(r[1]) for r in rows]), np.array([float(r[2]) for r in rows])


def attribution_document(report: AttributionReport, config: PipelineConfig, excluded: Sequence[int] = ()) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "config_digest": config.digest(), "excluded_channels": list(excluded)}
    doc.update(report.to_dict())
    return doc


def write_attribution(out: Path, stem: str, report: AttributionReport, config: PipelineConfig, excluded: Sequence[int] = ()) -> list[Path]:
    json_path = _dump_json(out / f"{stem}.json", attribution_document(report, config, excluded))
    csv_path = out / f"{stem}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["channel", "mean_shap", "percent"])
        for ch in report.to_dict()["channels"]:
            writer.writerow([ch["name"], "%.17g" % ch["mean_shap"], "%.17g" % ch["percent"]])
    return [json_path, csv_path]


def _metrics_block(result: ModelResult) -> dict:
    h = result.history
    return {
        "metrics": result.metrics.to_dict(),
        "training": {
            "stopped_epoch": h.stopped_epoch,
            "best_epoch": h.best_epoch,
            "best_monitor_loss": h.best_monitor_loss,
            "initial_monitor_loss": h.initial_monitor_loss,
        },
    }


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, config: PipelineConfig, files: dict[str, Path], input_hash: str | None) -> Path:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config_digest": config.digest(),
        "seed": config.seed,
        "input_sha256": input_hash,
        "versions": {"imfshap": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "files": {name: sha256_file(p) for name, p in sorted(files.items())},
    }
    return _dump_json(out / "manifest.json", manifest)


def decompose_stage(config: PipelineConfig, out: Path) -> Path:
    series = load_csv(config.input, config.column)
    decomposition = decompose(series, config.sift_config())
    logger.info("%s: %d IMFs plus residual", series.name, decomposition.num_imfs)
    return write_decomposition_csv(out / "decomposition.csv", series, decomposition)


def run_pipeline(config: PipelineConfig) -> RunArtifacts:
    """Decompose, train, predict, score, explain and (optionally) ablate; write every artifact."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    art = RunArtifacts(out_dir=out)

    def stage(name, fn, *args):
        t0 = time.perf_counter()
        try:
            value = fn(*args)
        except Exception as exc:
            raise StageError(name, exc) from exc
        art.timings[name] = art.timings.get(name, 0.0) + time.perf_counter() - t0
        return value

    art.files["config.txt"] = out / "config.txt"
    (out / "config.txt").write_text(config.to_text(include_locations=False))
    art.files["decomposition.csv"] = stage("decompose", decompose_stage, config, out)
    # downstream stages read the file back so staged and one-shot runs see identical inputs
    series, channels, names = read_decomposition_csv(art.files["decomposition.csv"], Path(config.input).stem)
    art.channel_names = names
    data = stage("prepare", prepare, series, channels, names, config)

    metrics_doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "config_digest": config.digest(),
        "series": {"name": series.name, "length": len(series), "channels": data.kept_names},
        "split": {"train": [0, data.split.boundary], "val": [data.split.boundary, data.split.length]},
        "models": {},
    }
    for kind in config.model_kinds:
        model, history = stage(f"train:{kind}", fit_forecaster, kind, data, config)
        preds, metrics = stage(f"predict:{kind}", evaluate, model, data)
        report, _ = stage(f"explain:{kind}", explain, model, data, config)
        result = ModelResult(kind, model, history, preds, metrics, report)
        art.results[kind] = result
        checkpoint.save(model, out / f"model_{kind}.json")
        art.files[f"model_{kind}.json"] = out / f"model_{kind}.json"
        art.files[f"predictions_{kind}.csv"] = write_predictions_csv(out / f"predictions_{kind}.csv", data, preds)
        for p in write_attribution(out, f"attribution_{kind}", report, config):
            art.files[p.name] = p
        metrics_doc["models"][kind] = _metrics_block(result)

    if config.exclude_imfs:
        metrics_doc["ablation"] = {"excluded_channels": list(config.exclude_imfs), "models": {}}
        ablated = stage("ablate:prepare", prepare, series, channels, names, config, config.exclude_imfs)
        for kind in config.model_kinds:
            result = stage(f"ablate:{kind}", run_model, kind, ablated, config)
            art.ablation[kind] = result
            block = _metrics_block(result)
            block["mse_change"] = result.metrics.mse - art.results[kind].metrics.mse
            metrics_doc["ablation"]["models"][kind] = block
            for p in write_attribution(out, f"attribution_{kind}_ablated", result.report, config, config.exclude_imfs):
                art.files[p.name] = p

    art.files["metrics.json"] = _dump_json(out / "metrics.json", metrics_doc)
    if config.plots:
        from .plots import render_plots

        try:
            for p in render_plots(out, config.model_kinds):
                art.files[p.name] = p
        except Exception:  # plots are best-effort
            logger.exception("plot rendering failed")
    for name, seconds in art.timings.items():
        logger.info("timing %-16s %.2fs", name, seconds)
    if config.record_timings:
        art.files["timings.json"] = _dump_json(out / "timings.json", {k: round(v, 6) for k, v in art.timings.items()})
    input_hash = sha256_file(config.input) if config.input and Path(config.input).exists() else None
    art.files["manifest.json"] = write_manifest(out, config, dict(art.files), input_hash)
    return art


# -- individual stages (used by the CLI) ----------------------------------------


def load_prepared(config: PipelineConfig, decomposition_path: str | Path) -> tuple[PreparedData, Series, np.ndarray, list[str]]:
    name = Path(config.input).stem if config.input else None
    series, channels, names = read_decomposition_csv(decomposition_path, name)
    return prepare(series, channels, names, config, config.exclude_imfs), series, channels, names


def _load_checkpoint(path: Path, data: PreparedData) -> ForecastModel:
    model = checkpoint.load(path)
    if list(model.channel_ids) != list(data.channel_ids):
        raise ValueError(
            f"{path.name} was trained on channels {[k + 1 for k in model.channel_ids]}, "
            f"but the configuration keeps {[k + 1 for k in data.channel_ids]}"
        )
    return model


def train_stage(config: PipelineConfig, decomposition_path: str | Path, out: Path) -> list[Path]:
    data = load_prepared(config, decomposition_path)[0]
    written = []
    for kind in config.model_kinds:
        model, history = fit_forecaster(kind, data, config)
        checkpoint.save(model, out / f"model_{kind}.json")
        written.append(out / f"model_{kind}.json")
        written.append(_dump_json(out / f"training_{kind}.json", history.to_dict()))
    return written


def predict_stage(config: PipelineConfig, decomposition_path: str | Path, out: Path, checkpoint_path: str | Path | None = None) -> list[Path]:
    data = load_prepared(config, decomposition_path)[0]
    written = []
    for kind in config.model_kinds:
        model = _load_checkpoint(Path(checkpoint_path or out / f"model_{kind}.json"), data)
        preds, metrics = evaluate(model, data)
        written.append(write_predictions_csv(out / f"predictions_{model.kind}.csv", data, preds))
        doc = {"schema_version": SCHEMA_VERSION, "config_digest": config.digest(), "metrics": metrics.to_dict()}
        written.append(_dump_json(out / f"metrics_{model.kind}.json", doc))
    return written


def explain_stage(config: PipelineConfig, decomposition_path: str | Path, out: Path, checkpoint_path: str | Path | None = None) -> list[Path]:
    data = load_prepared(config, decomposition_path)[0]
    written = []
    for kind in config.model_kinds:
        model = _load_checkpoint(Path(checkpoint_path or out / f"model_{kind}.json"), data)
        report, _ = explain(model, data, config)
        written += write_attribution(out, f"attribution_{model.kind}", report, config, config.exclude_imfs)
    return written
