"""Command line entry point: ``imfshap {decompose,train,predict,explain,run,plot}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import PipelineConfig

logger = logging.getLogger("imfshap")

# flag name -> config key
OVERRIDES = {
    "input": "input",
    "column": "column",
    "model": "model",
    "window": "window",
    "split": "split",
    "seed": "seed",
    "background": "background",
    "exclude_imfs": "exclude_imfs",
    "out": "out",
}


def _channel_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated channel numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file; flags override it")
    common.add_argument("--input", help="daily OHLCV CSV file")
    common.add_argument("--column", help="value column to model (default Close)")
    common.add_argument("--model", choices=("mlp", "lstm", "both"))
    common.add_argument("--window", type=int, help="past steps per input window")
    common.add_argument("--split", type=float, help="training fraction of the chronological split")
    common.add_argument("--seed", type=int)
    common.add_argument("--background", type=int, help="number of DeepSHAP baseline windows")
    common.add_argument("--exclude-imfs", type=_channel_list, help="1-based channel numbers to drop, e.g. 1,2")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="imfshap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("decompose", parents=[common], help="write decomposition.csv")
    for name, text in (
        ("train", "fit model(s) on a decomposition file"),
        ("predict", "one-step forecasts and metrics on the validation block"),
        ("explain", "DeepSHAP channel attribution on the validation block"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--decomposition", help="decomposition CSV (default OUT/decomposition.csv)")
        if name != "train":
            p.add_argument("--checkpoint", help="model checkpoint (default OUT/model_KIND.json)")
    sub.add_parser("run", parents=[common], help="full pipeline with optional ablation")
    sub.add_parser("plot", parents=[common], help="SVG charts from the files in OUT")
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    changes = {key: getattr(args, flag) for flag, key in OVERRIDES.items() if getattr(args, flag) is not None}
    return config.replace(**changes) if changes else config


def main(argv: list[str] | None = None) -> int:
    from . import pipeline
    from .plots import render_plots

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return 2
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    decomposition = Path(getattr(args, "decomposition", None) or out / "decomposition.csv")
    checkpoint = getattr(args, "checkpoint", None)
    try:
        if args.command == "run":
            written = list(pipeline.run_pipeline(config).files.values())
        elif args.command == "decompose":
            written = [pipeline.decompose_stage(config, out)]
        elif args.command == "train":
            written = pipeline.train_stage(config, decomposition, out)
        elif args.command == "predict":
            written = pipeline.predict_stage(config, decomposition, out, checkpoint)
        elif args.command == "explain":
            written = pipeline.explain_stage(config, decomposition, out, checkpoint)
        else:
            try:
                written = render_plots(out, config.model_kinds)
            except Exception:  # plots never fail the command
                logger.exception("plot rendering failed")
                written = []
    except pipeline.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"error: stage '{args.command}' failed: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
