"""Tests for repeated trials and their reports."""

import numpy as np
import pytest

from gad_tree_bench.datagen import GenSpec, generate
from gad_tree_bench.errors import TrialError, ValidationError
from gad_tree_bench.protocol.families import parse_family
from gad_tree_bench.protocol.seeding import derive_seed
from gad_tree_bench.protocol.splits import full_split
from gad_tree_bench.protocol.trials import FeatureCache, aggregate_repeats, model_seed, run_trials
from gad_tree_bench.schemas import BenchReport

# Smallest mean test AUPRC gain of aggregated over raw features on the
# neighborhood dataset below.
AGGREGATION_MARGIN = 0.15

FAST_XGB = {"n_estimators": 10, "max_depth": 3}


@pytest.fixture(scope="module")
def dataset():
    """A small neighborhood dataset with room for a semi split."""
    return generate(GenSpec(num_nodes=600, avg_degree=6, dim=4, anomaly_ratio=0.1, seed=5))


@pytest.fixture(scope="module")
def neighborhood_dataset():
    """The dataset on which aggregation is expected to pay off."""
    return generate(GenSpec(num_nodes=2000, avg_degree=10, dim=8, anomaly_ratio=0.05, noise=0.02, seed=0))


@pytest.fixture(scope="module")
def layer_auprc(neighborhood_dataset):
    """Mean test AUPRC of xgb-graph at L = 0, 2 and 4 over ten repeats."""
    cache = FeatureCache(neighborhood_dataset, workers=2)
    results = {}
    for layers in (0, 2, 4):
        report = run_trials(
            "xgb-graph", {"layers": layers}, neighborhood_dataset, n_repeats=10, master_seed=0, workers=2, cache=cache
        )
        results[layers] = report.aggregate["auprc"].mean
    return results


def test_single_repeat_report(dataset):
    """One repeat gives one record and a zero-spread aggregate."""
    report = run_trials("xgb", FAST_XGB, dataset, n_repeats=1, master_seed=3)

    assert report.n_repeats == 1
    assert len(report.repeats) == 1
    assert report.repeats[0].seed == derive_seed(3, 0)
    assert report.aggregate["auprc"].std == 0.0
    assert report.aggregate["auprc"].mean == report.repeats[0].test.auprc


def test_report_records_run_identity(dataset):
    """The report names the dataset, family, setting and configuration."""
    report = run_trials("rf-graph", {"n_estimators": 5, "L": 1}, dataset, setting="semi", n_repeats=2)

    assert report.dataset == dataset.name
    assert report.family == "rf-graph"
    assert report.setting == "semi"
    assert report.config["layers"] == 1
    assert report.config["n_estimators"] == 5
    assert report.total_seconds == 0.0
    assert report.repeats[0].test.fit_seconds == 0.0


def test_aggregate_is_recomputable_from_repeats(dataset):
    """Aggregates are the mean and population std of the per-repeat test metrics."""
    report = run_trials("xgb-graph", FAST_XGB, dataset, n_repeats=4, master_seed=1)

    for metric in ("auroc", "auprc", "rec_at_k"):
        values = np.array([getattr(record.test, metric) for record in report.repeats])
        assert report.aggregate[metric].mean == pytest.approx(values.mean(), abs=1e-12)
        assert report.aggregate[metric].std == pytest.approx(values.std(ddof=0), abs=1e-12)
    assert aggregate_repeats(list(reversed(report.repeats))) == report.aggregate


def test_runs_are_deterministic(dataset):
    """Equal arguments give byte-identical reports."""
    first = run_trials("xgb-graph+na", FAST_XGB, dataset, n_repeats=2, master_seed=8)
    second = run_trials("xgb-graph+na", FAST_XGB, dataset, n_repeats=2, master_seed=8)

    assert first.model_dump_json() == second.model_dump_json()


@pytest.mark.parametrize("family", ["rf-graph", "knn+na"])
def test_worker_count_does_not_change_reports(dataset, family):
    """Reports are identical at any worker count."""
    overrides = {"n_estimators": 8} if family.startswith("rf") else {"k": 7}

    single = run_trials(family, overrides, dataset, n_repeats=2, workers=1)
    threaded = run_trials(family, overrides, dataset, n_repeats=2, workers=4)

    assert single.model_dump_json() == threaded.model_dump_json()


def test_repeats_use_derived_split_and_model_seeds(dataset):
    """Repeat r trains on the split drawn from derive_seed(master, r)."""
    models = []
    report = run_trials("xgb", FAST_XGB, dataset, n_repeats=2, master_seed=4, models=models)

    split_seed = derive_seed(4, 1)
    split = full_split(dataset.labels, seed=split_seed)
    assert report.repeats[1].seed == split_seed
    assert report.repeats[1].test.num_pos + report.repeats[1].test.num_neg == len(split.test)
    assert len(models) == 2
    assert model_seed(split_seed) == derive_seed(split_seed, 1)


def test_report_round_trips_through_json(dataset):
    """A parsed report equals the report it was serialized from."""
    report = run_trials("knn", {"k": 3}, dataset, n_repeats=2)

    assert BenchReport.model_validate_json(report.model_dump_json()) == report


def test_resource_recording_fills_timings(dataset):
    """Opting in records positive fit and total times."""
    report = run_trials("xgb", FAST_XGB, dataset, n_repeats=1, record_resources=True)

    assert report.total_seconds > 0
    assert report.repeats[0].test.fit_seconds > 0


def test_failed_repeat_is_wrapped():
    """A split failure surfaces as a TrialError naming the repeat and cause."""
    small = generate(GenSpec(num_nodes=300, avg_degree=4, dim=2, anomaly_ratio=0.1, seed=1))

    with pytest.raises(TrialError) as excinfo:
        run_trials("xgb", FAST_XGB, small, setting="semi", n_repeats=3)

    assert excinfo.value.details["repeat"] == 0
    assert excinfo.value.details["cause"]["code"] == "insufficient_labels"
    assert excinfo.value.to_dict()["code"] == "trial_failed"


def test_invalid_repeat_count(dataset):
    """At least one repeat is required."""
    with pytest.raises(ValidationError, match="n_repeats"):
        run_trials("xgb", None, dataset, n_repeats=0)


def test_feature_cache_reuses_stacks(dataset):
    """The same (L, kind) is stacked once; L=0 returns raw features."""
    cache = FeatureCache(dataset)
    config = parse_family("xgb-graph").resolve({"layers": 2})

    first = cache.features(config)

    assert cache.features(config) is first
    assert first.shape == (dataset.num_nodes, dataset.features.dim * 3)
    assert cache.features(parse_family("xgb").resolve()) is dataset.features.values
    assert cache.features(parse_family("xgb-graph").resolve({"layers": 0})) is dataset.features.values


def test_aggregation_beats_raw_features(layer_auprc, neighborhood_dataset):
    """Two mean-aggregation layers lift test AUPRC well above a feature-only model."""
    raw = run_trials("xgb", None, neighborhood_dataset, n_repeats=10, master_seed=0, workers=2)

    assert raw.aggregate["auprc"].mean == layer_auprc[0]
    assert layer_auprc[2] - layer_auprc[0] >= AGGREGATION_MARGIN


def test_layer_sweep_shape(layer_auprc):
    """Two layers beat none and four layers do not collapse."""
    assert layer_auprc[2] > layer_auprc[0]
    assert layer_auprc[4] >= layer_auprc[2] - 0.05
