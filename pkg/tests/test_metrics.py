"""Tests for ranking metrics and resource bookkeeping."""

import time

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sklearn.metrics import average_precision_score, roc_auc_score

from gad_tree_bench.errors import DegenerateLabelsError, ValidationError
from gad_tree_bench.metrics import (
    ResourceMonitor,
    auroc,
    average_precision,
    evaluate,
    precision_at_k,
    recall_at_k,
)
from gad_tree_bench.schemas import MetricReport

small_instances = st.integers(min_value=2, max_value=12).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(min_value=0, max_value=4), min_size=n, max_size=n),
        st.lists(st.integers(min_value=0, max_value=1), min_size=n, max_size=n),
    )
)


@pytest.fixture
def ranked_eleventh_to_twentieth():
    """Return 1000 scored nodes whose 10 anomalies sit at ranks 11 to 20."""
    scores = np.arange(1000, 0, -1, dtype=float)
    labels = np.zeros(1000, dtype=int)
    labels[10:20] = 1
    return scores, labels


def exhaustive_auroc(scores, labels):
    """Pair-counting AUROC."""
    pos = [s for s, y in zip(scores, labels, strict=True) if y == 1]
    neg = [s for s, y in zip(scores, labels, strict=True) if y == 0]
    credit = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return credit / (len(pos) * len(neg))


def definitional_ap(scores, labels):
    """AP summed over distinct thresholds in descending order."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    num_pos = labels.sum()
    total, previous_recall = 0.0, 0.0
    for threshold in sorted(set(scores.tolist()), reverse=True):
        selected = scores >= threshold
        hits = labels[selected].sum()
        recall = hits / num_pos
        total += (recall - previous_recall) * hits / selected.sum()
        previous_recall = recall
    return total


def test_anomalies_ranked_just_below_top_k(ranked_eleventh_to_twentieth):
    """Test anomalies ranked 11th-20th of 1000 give 0.989899 / 0.331229 / 0."""
    scores, labels = ranked_eleventh_to_twentieth
    start = time.perf_counter()
    report = evaluate(scores, labels)
    assert time.perf_counter() - start < 1.0
    assert report.auroc == pytest.approx(980 / 990, abs=1e-12)
    assert report.auroc == pytest.approx(0.989899, abs=1e-6)
    assert report.auprc == pytest.approx(0.331229, abs=1e-6)
    assert report.auprc == pytest.approx(sum(i / (10 + i) for i in range(1, 11)) / 10, abs=1e-12)
    assert report.rec_at_k == 0.0
    assert report.k == 10
    assert (report.num_pos, report.num_neg) == (10, 990)


def test_perfect_ranking():
    """Test positives above all negatives score 1 everywhere."""
    scores = np.array([0.9, 0.8, 0.1, 0.2, 0.05])
    labels = np.array([1, 1, 0, 0, 0])
    assert auroc(scores, labels) == 1.0
    assert average_precision(scores, labels) == 1.0
    assert recall_at_k(scores, labels, 2) == 1.0


def test_reversed_ranking():
    """Test an antiperfect ranking gives AUROC 0 and Rec@K 0."""
    scores = np.array([0.1, 0.2, 0.8, 0.9])
    labels = np.array([1, 1, 0, 0])
    report = evaluate(scores, labels)
    assert report.auroc == 0.0
    assert report.rec_at_k == 0.0


def test_all_equal_scores():
    """Test constant scores give AUROC 0.5 and AP equal to prevalence."""
    labels = np.zeros(1000, dtype=int)
    labels[:10] = 1
    scores = np.full(1000, 0.3)
    assert auroc(scores, labels) == 0.5
    assert average_precision(scores, labels) == pytest.approx(0.01)


def test_recall_at_k_half_hits():
    """Test 5 anomalies in the top 10 with 10 anomalies in total give 0.5."""
    scores = np.arange(20, 0, -1, dtype=float)
    labels = np.array([1, 0] * 5 + [0, 1] * 5)
    assert recall_at_k(scores, labels, 10) == 0.5


def test_recall_at_k_boundary_ties_use_node_index():
    """Test tied scores at the cut-off go to the lower node index."""
    scores = np.array([1.0, 1.0, 1.0, 0.0])
    assert recall_at_k(scores, np.array([1, 0, 0, 0]), 1) == 1.0
    assert recall_at_k(scores, np.array([0, 1, 0, 0]), 1) == 0.0


def test_single_class_is_rejected():
    """Test AUROC needs both classes and AP a positive."""
    with pytest.raises(DegenerateLabelsError):
        auroc(np.array([0.1, 0.2]), np.array([1, 1]))
    with pytest.raises(DegenerateLabelsError):
        average_precision(np.array([0.1, 0.2]), np.array([0, 0]))


def test_k_out_of_range_is_rejected():
    """Test k must lie in [1, n]."""
    with pytest.raises(ValidationError, match="k out of range"):
        recall_at_k(np.array([0.1, 0.2]), np.array([1, 0]), 3)
    with pytest.raises(ValidationError, match="k out of range"):
        recall_at_k(np.array([0.1, 0.2]), np.array([1, 0]), 0)


def test_random_reports_are_finite():
    """Test report fields are finite for random scores."""
    rng = np.random.default_rng(3)
    scores = rng.random(300)
    labels = (rng.random(300) < 0.1).astype(int)
    labels[0] = 1
    report = evaluate(scores, labels)
    assert all(np.isfinite(value) for value in (report.auroc, report.auprc, report.rec_at_k))


def test_report_json_round_trip(ranked_eleventh_to_twentieth):
    """Test a metric report parses back to an equal report."""
    report = evaluate(*ranked_eleventh_to_twentieth)
    assert MetricReport.model_validate_json(report.model_dump_json()) == report


@settings(max_examples=500, deadline=None)
@given(small_instances)
def test_auroc_matches_pair_counting(instance):
    """Test AUROC equals exhaustive pair counting on small instances."""
    scores, labels = instance
    assume(0 < sum(labels) < len(labels))
    assert auroc(np.array(scores, dtype=float), np.array(labels)) == pytest.approx(
        exhaustive_auroc(scores, labels), abs=1e-12
    )


@settings(max_examples=500, deadline=None)
@given(small_instances)
def test_average_precision_matches_definition(instance):
    """Test AP equals the definitional threshold sum on small instances."""
    scores, labels = instance
    assume(sum(labels) > 0)
    assert average_precision(np.array(scores, dtype=float), np.array(labels)) == pytest.approx(
        definitional_ap(scores, labels), abs=1e-12
    )


@settings(max_examples=100, deadline=None)
@given(small_instances)
def test_recall_at_num_pos_equals_precision(instance):
    """Test Rec@K equals Prec@K when k is the number of positives."""
    scores, labels = instance
    num_pos = sum(labels)
    assume(num_pos > 0)
    scores, labels = np.array(scores, dtype=float), np.array(labels)
    assert recall_at_k(scores, labels, num_pos) == precision_at_k(scores, labels, num_pos)


@settings(max_examples=200, deadline=None)
@given(small_instances)
def test_strictly_increasing_transform_keeps_metrics(instance):
    """Test metrics ignore strictly increasing transforms of the scores."""
    scores, labels = instance
    assume(0 < sum(labels) < len(labels))
    scores, labels = np.array(scores, dtype=float), np.array(labels)
    transformed = scores**3 + 5 * scores - 7
    assert evaluate(transformed, labels) == evaluate(scores, labels)


def test_negated_scores_complement_auroc():
    """Test auroc(s) + auroc(-s) = 1 without ties."""
    rng = np.random.default_rng(8)
    for _ in range(50):
        scores = rng.permutation(30).astype(float)
        labels = rng.integers(0, 2, size=30)
        labels[:2] = [0, 1]
        assert auroc(scores, labels) + auroc(-scores, labels) == pytest.approx(1.0, abs=1e-12)


def test_agrees_with_reference_implementation():
    """Test AUROC and AP agree with scikit-learn on tied random scores."""
    rng = np.random.default_rng(2)
    for _ in range(20):
        scores = rng.integers(0, 20, size=200).astype(float)
        labels = (rng.random(200) < 0.2).astype(int)
        labels[:2] = [0, 1]
        assert auroc(scores, labels) == pytest.approx(roc_auc_score(labels, scores), abs=1e-12)
        assert average_precision(scores, labels) == pytest.approx(
            average_precision_score(labels, scores), abs=1e-12
        )


def test_resource_monitor_records_time_and_memory():
    """Test an enabled monitor records a positive duration and memory."""
    with ResourceMonitor() as monitor:
        block = np.ones(2_000_000)
        time.sleep(0.05)
    assert block.sum() == 2_000_000
    assert monitor.seconds >= 0.05
    assert monitor.peak_memory_bytes > 0


def test_disabled_resource_monitor_reports_zeros():
    """Test a disabled monitor leaves both fields at zero."""
    with ResourceMonitor(enabled=False) as monitor:
        time.sleep(0.01)
    assert monitor.seconds == 0.0
    assert monitor.peak_memory_bytes == 0
