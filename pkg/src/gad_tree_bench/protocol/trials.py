"""Repeated train/evaluate runs of one family configuration."""

import logging
import threading
from collections.abc import Mapping
from typing import Any

import numpy as np

from gad_tree_bench import __version__
from gad_tree_bench.baselines import neighborhood_average
from gad_tree_bench.ensemble import EnsembleModel
from gad_tree_bench.errors import GadError, TrialError, ValidationError
from gad_tree_bench.features import stack
from gad_tree_bench.graph.dataset import Dataset
from gad_tree_bench.metrics import ResourceMonitor, evaluate
from gad_tree_bench.protocol.families import Family, ResolvedConfig, fit_and_score, parse_family
from gad_tree_bench.protocol.seeding import derive_seed
from gad_tree_bench.protocol.splits import FULL_RATIOS, Setting, SplitSpec, make_split
from gad_tree_bench.schemas import AGGREGATED_METRICS, BenchReport, MetricReport, MetricSummary, RepeatRecord

logger = logging.getLogger(__name__)


class FeatureCache:
    """Stacked feature matrices of one dataset, built once per (L, kind)."""

    def __init__(self, dataset: Dataset, workers: int = 1):
        self.dataset = dataset
        self.workers = workers
        self._matrices: dict[tuple[int, str], np.ndarray] = {}
        self._lock = threading.Lock()

    def features(self, config: ResolvedConfig) -> np.ndarray:
        """Training matrix for ``config``: raw features, or ``[h0 | ... | hL]``."""
        if config.graph is None or config.graph.layers == 0:
            return self.dataset.features.values
        key = (config.graph.layers, str(config.graph.agg))
        with self._lock:
            if key not in self._matrices:
                logger.info("Stacking L=%d %s features for %s", key[0], key[1], self.dataset.name)
                stacked = stack(
                    self.dataset.graph, self.dataset.features, config.graph.layers, config.graph.agg, self.workers
                )
                self._matrices[key] = stacked.values
            return self._matrices[key]


def model_seed(split_seed: int) -> int:
    """Seed of the learner trained on the split drawn with ``split_seed``."""
    return derive_seed(split_seed, 1)


def evaluate_split(
    dataset: Dataset,
    config: ResolvedConfig,
    split: SplitSpec,
    seed: int,
    cache: FeatureCache,
    workers: int = 1,
    record_resources: bool = False,
) -> tuple[MetricReport, MetricReport, EnsembleModel | None]:
    """Train on ``split.train``; return validation and test reports and the model.

    Neighborhood averaging, when configured, runs within each evaluated node
    set over the raw features.
    """
    X = cache.features(config)
    labels = dataset.labels.labels
    with ResourceMonitor(enabled=record_resources) as monitor:
        fitted = fit_and_score(
            config,
            X[split.train],
            labels[split.train],
            [X[split.val], X[split.test]],
            seed,
            workers,
        )
    reports = []
    for ids, scores in zip((split.val, split.test), fitted.scores, strict=True):
        if config.na is not None:
            scores = neighborhood_average(scores, dataset.features.values[ids], config.na, workers)
        reports.append(
            evaluate(
                scores,
                labels[ids],
                fit_seconds=monitor.seconds,
                peak_memory_bytes=monitor.peak_memory_bytes,
            )
        )
    return reports[0], reports[1], fitted.model


def aggregate_repeats(repeats: list[RepeatRecord]) -> dict[str, MetricSummary]:
    """Mean and population std of each test metric, in repeat-index order."""
    ordered = sorted(repeats, key=lambda record: record.repeat)
    summary = {}
    for metric in AGGREGATED_METRICS:
        values = np.array([getattr(record.test, metric) for record in ordered], dtype=np.float64)
        summary[metric] = MetricSummary(mean=float(values.mean()), std=float(values.std()))
    return summary


def run_trials(
    family: Family | str,
    config: Mapping[str, Any] | None,
    dataset: Dataset,
    setting: Setting | str = Setting.FULL,
    n_repeats: int = 10,
    master_seed: int = 0,
    workers: int = 1,
    split_name: str | None = None,
    ratios: tuple[float, float, float] = FULL_RATIOS,
    record_resources: bool = False,
    cache: FeatureCache | None = None,
    models: list[EnsembleModel | None] | None = None,
) -> BenchReport:
    """Evaluate one configuration over ``n_repeats`` seeded splits.

    Repeat ``r`` draws its split from ``derive_seed(master_seed, r)`` and
    trains with ``derive_seed(split_seed, 1)``. The report is a pure function
    of the arguments unless ``record_resources`` is set.

    Args:
        family: Family name or parsed family
        config: Overrides on the family defaults
        dataset: Dataset to evaluate on
        setting: full (ratio split) or semi (20 + 80 labels)
        n_repeats: Number of splits
        master_seed: Seed every repeat derives from
        workers: Threads for aggregation, tree fitting and neighbor search
        split_name: Reuse this pre-existing split in every repeat
        ratios: Train/val/test fractions of the full setting
        record_resources: Record fit time and peak memory
        cache: Stacked features shared with other calls on the same dataset
        models: When given, receives each repeat's fitted ensemble

    Returns:
        Per-repeat reports and their aggregate

    Raises:
        UnknownFamilyError: Unknown family name
        ValidationError: Invalid configuration or n_repeats below 1
        TrialError: A repeat failed; ``details["repeat"]`` names it
    """
    if n_repeats < 1:
        raise ValidationError(f"n_repeats must be at least 1, got {n_repeats}")
    family = parse_family(family) if isinstance(family, str) else family
    resolved = family.resolve(config)
    setting = Setting(setting)
    cache = cache or FeatureCache(dataset, workers)

    repeats = []
    with ResourceMonitor(enabled=record_resources) as total:
        for repeat in range(n_repeats):
            split_seed = derive_seed(master_seed, repeat)
            try:
                split = make_split(dataset, setting, split_seed, ratios, split_name)
                val, test, model = evaluate_split(
                    dataset, resolved, split, model_seed(split_seed), cache, workers, record_resources
                )
            except GadError as exc:
                raise TrialError(f"repeat {repeat} failed: {exc.message}", cause=exc, repeat=repeat) from exc
            except Exception as exc:  # pylint: disable=broad-except
                raise TrialError(f"repeat {repeat} failed: {exc}", cause=exc, repeat=repeat) from exc
            if models is not None:
                models.append(model)
            repeats.append(RepeatRecord(repeat=repeat, seed=split_seed, val=val, test=test))
            logger.info(
                "%s repeat %d/%d: test AUROC %.4f AUPRC %.4f Rec@K %.4f",
                family.name,
                repeat + 1,
                n_repeats,
                test.auroc,
                test.auprc,
                test.rec_at_k,
            )

    return BenchReport(
        artifact_version=__version__,
        dataset=dataset.name,
        family=family.name,
        setting=str(setting),
        split_name=split_name,
        n_repeats=n_repeats,
        master_seed=master_seed,
        config=resolved.as_dict(),
        repeats=repeats,
        aggregate=aggregate_repeats(repeats),
        total_seconds=total.seconds,
    )
