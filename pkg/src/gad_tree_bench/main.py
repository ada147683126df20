"""Command-line entry point: ``gad gen | run | tune | sweep-layers | convert``."""

import argparse
import csv
import io
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import pydantic
import yaml

from gad_tree_bench import __version__
from gad_tree_bench.config import BenchSettings, Config, load_config
from gad_tree_bench.datagen import GenSpec, Mechanism, generate
from gad_tree_bench.errors import GadError, ValidationError
from gad_tree_bench.graph import Dataset, convert_text_files, load_dataset, save_dataset
from gad_tree_bench.protocol import FeatureCache, Setting, parse_family, random_search, run_trials
from gad_tree_bench.schemas import AGGREGATED_METRICS, BenchReport, LayerSweepRow

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
SWEEP_LAYERS = (0, 1, 2, 3, 4)
SWEEP_FAMILIES = ("rf-graph", "xgb-graph")
MODEL_FILE = "model.json"


def _override(text: str) -> tuple[str, Any]:
    """Parse ``key=value``; the value is read as JSON when it parses, else kept as a string."""
    key, separator, raw = text.partition("=")
    if not separator or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _ratios(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected three comma-separated fractions, got {text!r}") from exc
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated fractions, got {text!r}")
    return values  # type: ignore[return-value]


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="gad.yaml", help="YAML configuration file (optional)")
    common.add_argument("--workers", type=int, default=None, help="Worker threads (env GAD_WORKERS)")
    common.add_argument("--log-level", default=None, help="Logging level (env GAD_LOG_LEVEL)")

    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument("--data", required=True, help="Dataset directory")
    experiment.add_argument("--model", required=True, help="Family: rf, xgb, knn, rf-graph, xgb-graph[, +na]")
    experiment.add_argument("--setting", choices=[str(s) for s in Setting], default=str(Setting.FULL))
    experiment.add_argument("--seed", type=int, default=None, help="Master seed (env GAD_MASTER_SEED)")
    experiment.add_argument("--split", default=None, help="Use this pre-existing split from splits.json")
    experiment.add_argument("--ratios", type=_ratios, default=None, help="Full-setting train,val,test fractions")

    parser = argparse.ArgumentParser(prog="gad", description="Graph anomaly detection with tree ensembles")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="Generate a synthetic dataset")
    gen.add_argument("--mechanism", choices=[str(m) for m in Mechanism], default=str(Mechanism.NEIGHBORHOOD))
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--avg-degree", type=float, required=True)
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--anomaly-ratio", type=float, required=True)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--shift", type=float, default=1.0, help="Feature-only anomaly shift")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="Output dataset directory")

    run = commands.add_parser("run", parents=[common, experiment], help="Repeated train/evaluate runs")
    run.add_argument("--repeats", type=int, default=None, help="Number of splits (env GAD_REPEATS)")
    run.add_argument("--set", dest="overrides", type=_override, action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--params", default=None, help="JSON overrides file; a tune report's best_config is used")
    run.add_argument("--out", default=None, help="Report path (stdout when omitted)")
    run.add_argument("--csv", default=None, help="Also write a one-row CSV summary here")
    run.add_argument("--save-model", default=None, help="Directory to write repeat 0's model to")
    run.add_argument(
        "--record-resources",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Record fit time and peak memory (reports stop being reproducible)",
    )

    tune = commands.add_parser("tune", parents=[common, experiment], help="Random hyperparameter search")
    tune.add_argument("--trials", type=int, default=20)
    tune.add_argument("--out", default=None, help="Report path (stdout when omitted)")

    sweep = commands.add_parser("sweep-layers", parents=[common, experiment], help="Metrics for L = 0..4")
    sweep.add_argument("--repeats", type=int, default=None)
    sweep.add_argument("--set", dest="overrides", type=_override, action="append", default=[], metavar="KEY=VALUE")
    sweep.add_argument("--out", default=None, help="CSV path (stdout when omitted)")

    convert = commands.add_parser("convert", parents=[common], help="Convert text files to a dataset directory")
    convert.add_argument("--edges", required=True)
    convert.add_argument("--features", required=True)
    convert.add_argument("--labels", required=True)
    convert.add_argument("--out", required=True)
    convert.add_argument("--name", default="dataset")
    convert.add_argument("--directed", action="store_true")
    convert.add_argument("--splits", default=None, help="splits.json to validate and copy")
    return parser


def _number(value: float, digits: int) -> str:
    return format(value, f".{digits}g")


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", target)


def _to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _load_params(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"{path}: malformed JSON: {exc}") from exc
    if isinstance(document, dict) and isinstance(document.get("best_config"), dict):
        return document["best_config"]
    if not isinstance(document, dict):
        raise ValidationError(f"{path}: expected a JSON object of overrides")
    return document


def cmd_gen(args: argparse.Namespace, config: Config) -> int:
    """Generate a dataset directory and print its summary line."""
    try:
        spec = GenSpec(
            num_nodes=args.nodes,
            avg_degree=args.avg_degree,
            dim=args.dim,
            anomaly_ratio=args.anomaly_ratio,
            mechanism=args.mechanism,
            noise=args.noise,
            seed=args.seed,
            shift=args.shift,
        )
    except pydantic.ValidationError as exc:
        error = exc.errors()[0]
        raise ValidationError(f"invalid {error['loc'][0]}: {error['msg']}") from exc
    dataset = generate(spec)
    save_dataset(dataset, args.out)
    print(dataset.summary_line())
    return 0


def bench_csv(report: BenchReport, digits: int) -> str:
    """One-row CSV summary of a bench report."""
    header = ["dataset", "family", "setting", "n_repeats", "master_seed"]
    row: list[Any] = [report.dataset, report.family, report.setting, report.n_repeats, report.master_seed]
    for metric in AGGREGATED_METRICS:
        header += [f"mean_{metric}", f"std_{metric}"]
        summary = report.aggregate[metric]
        row += [_number(summary.mean, digits), _number(summary.std, digits)]
    return _to_csv(header, [row])


def cmd_run(args: argparse.Namespace, config: Config) -> int:
    """Run repeated trials and write the bench report."""
    dataset = load_dataset(args.data)
    logger.info("Dataset %s", json.dumps(dataset.summary(), sort_keys=True))
    family = parse_family(args.model)
    overrides = {**_load_params(args.params), **dict(args.overrides)}
    record_resources = config.bench.record_resources if args.record_resources is None else args.record_resources
    models: list = []
    kwargs = {"ratios": args.ratios} if args.ratios else {}
    report = run_trials(
        family,
        overrides,
        dataset,
        setting=args.setting,
        n_repeats=config.bench.n_repeats if args.repeats is None else args.repeats,
        master_seed=config.bench.master_seed if args.seed is None else args.seed,
        workers=config.runtime.workers,
        split_name=args.split,
        record_resources=record_resources,
        models=models,
        **kwargs,
    )
    _write_text(args.out, report.model_dump_json(indent=config.output.json_indent) + "\n")
    if args.csv:
        _write_text(args.csv, bench_csv(report, config.output.csv_significant_digits))
    if args.save_model:
        if models and models[0] is not None:
            _write_text(str(Path(args.save_model) / MODEL_FILE), models[0].to_json() + "\n")
        else:
            logger.warning("Family %s has no tree ensemble to save", family.name)
    test = report.aggregate
    print(
        f"{report.family} on {report.dataset}: test AUROC {test['auroc'].mean:.4f}±{test['auroc'].std:.4f} "
        f"AUPRC {test['auprc'].mean:.4f}±{test['auprc'].std:.4f} "
        f"Rec@K {test['rec_at_k'].mean:.4f}±{test['rec_at_k'].std:.4f}",
        file=sys.stderr if args.out is None else sys.stdout,
    )
    return 0


def cmd_tune(args: argparse.Namespace, config: Config) -> int:
    """Random search; write the tuning report and print the winner."""
    if args.trials < 1:
        raise ValidationError(f"--trials must be at least 1, got {args.trials}")
    dataset = load_dataset(args.data)
    kwargs = {"ratios": args.ratios} if args.ratios else {}
    report = random_search(
        args.model,
        dataset,
        setting=args.setting,
        n_trials=args.trials,
        master_seed=config.bench.master_seed if args.seed is None else args.seed,
        workers=config.runtime.workers,
        split_name=args.split,
        **kwargs,
    )
    _write_text(args.out, report.model_dump_json(indent=config.output.json_indent) + "\n")
    print(
        f"best trial {report.best_trial}: val AUPRC {report.best_val.auprc:.4f}; "
        f"test AUROC {report.best_test.auroc:.4f} AUPRC {report.best_test.auprc:.4f} "
        f"Rec@K {report.best_test.rec_at_k:.4f}",
        file=sys.stderr if args.out is None else sys.stdout,
    )
    return 0


def sweep_rows(
    family: str,
    dataset: Dataset,
    overrides: dict[str, Any],
    setting: str,
    n_repeats: int,
    master_seed: int,
    workers: int,
    split_name: str | None = None,
) -> list[LayerSweepRow]:
    """Mean test metrics of ``family`` at every aggregation depth 0..4."""
    parsed = parse_family(family)
    if not parsed.graph:
        raise ValidationError(f"sweep-layers needs one of {', '.join(SWEEP_FAMILIES)}, got {family!r}")
    cache = FeatureCache(dataset, workers)
    rows = []
    for layers in SWEEP_LAYERS:
        report = run_trials(
            parsed,
            {**overrides, "layers": layers},
            dataset,
            setting=setting,
            n_repeats=n_repeats,
            master_seed=master_seed,
            workers=workers,
            split_name=split_name,
            cache=cache,
        )
        rows.append(
            LayerSweepRow(
                layers=layers,
                mean_auprc=report.aggregate["auprc"].mean,
                std_auprc=report.aggregate["auprc"].std,
                mean_auroc=report.aggregate["auroc"].mean,
                mean_rec_at_k=report.aggregate["rec_at_k"].mean,
            )
        )
    return rows


def cmd_sweep_layers(args: argparse.Namespace, config: Config) -> int:
    """Emit a CSV of test metrics against L = 0..4."""
    dataset = load_dataset(args.data)
    overrides = {key: value for key, value in args.overrides if key not in ("L", "layers")}
    rows = sweep_rows(
        args.model,
        dataset,
        overrides,
        args.setting,
        config.bench.n_repeats if args.repeats is None else args.repeats,
        config.bench.master_seed if args.seed is None else args.seed,
        config.runtime.workers,
        args.split,
    )
    digits = config.output.csv_significant_digits
    text = _to_csv(
        ["L", "mean_auprc", "std_auprc", "mean_auroc", "mean_rec_at_k"],
        [
            [
                row.layers,
                _number(row.mean_auprc, digits),
                _number(row.std_auprc, digits),
                _number(row.mean_auroc, digits),
                _number(row.mean_rec_at_k, digits),
            ]
            for row in rows
        ],
    )
    _write_text(args.out, text)
    return 0


def cmd_convert(args: argparse.Namespace, config: Config) -> int:
    """Ingest plain text files into a dataset directory."""
    dataset = convert_text_files(
        args.edges, args.features, args.labels, name=args.name, directed=args.directed, splits_path=args.splits
    )
    save_dataset(dataset, args.out)
    print(dataset.summary_line())
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "run": cmd_run,
    "tune": cmd_tune,
    "sweep-layers": cmd_sweep_layers,
    "convert": cmd_convert,
}


def _report_error(error: dict[str, Any]) -> None:
    sys.stderr.write(json.dumps({"error": error}, sort_keys=True) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, configure logging and dispatch.

    Returns:
        Exit code: 0 on success, 1 on any runtime error. Usage errors exit 2
        from argparse.
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.workers is not None:
            config.runtime.workers = args.workers
        if args.log_level:
            config.runtime.log_level = args.log_level.upper()
        if args.command != "gen" and getattr(args, "seed", None) is not None:
            config.bench = BenchSettings.model_validate(config.bench.model_dump() | {"master_seed": args.seed})
        if config.runtime.workers < 1:
            raise ValidationError(f"workers must be at least 1, got {config.runtime.workers}")
        if config.runtime.log_level not in logging.getLevelNamesMapping():
            raise ValidationError(f"unknown log level {config.runtime.log_level!r}")
    except pydantic.ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"])
        _report_error(ValidationError(f"invalid configuration {field}: {error['msg']}").to_dict())
        return 1
    except (ValueError, OSError, yaml.YAMLError, GadError) as exc:
        message = exc.message if isinstance(exc, GadError) else str(exc)
        _report_error(ValidationError(f"invalid configuration: {message}").to_dict())
        return 1

    logging.basicConfig(level=config.runtime.log_level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    logger.debug("Running %s with %d workers", args.command, config.runtime.workers)

    try:
        return COMMANDS[args.command](args, config)
    except GadError as exc:
        logger.debug("Command failed", exc_info=True)
        _report_error(exc.to_dict())
    except OSError as exc:
        logger.debug("Command failed", exc_info=True)
        _report_error({"code": "io_error", "message": str(exc)})
    except pydantic.ValidationError as exc:
        logger.debug("Command failed", exc_info=True)
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"])
        _report_error(ValidationError(f"invalid {field}: {error['msg']}").to_dict())
    return 1


if __name__ == "__main__":
    sys.exit(main())
