"""Imbalance-aware ranking metrics.

Anomalies (label 1) are the positive class. All three metrics are
deterministic under ties:

* AUROC gives tied (positive, negative) pairs half credit (Mann-Whitney U).
* Average precision groups equal scores into a single threshold.
* Rec@K breaks ties at the k-th boundary by ascending node index.
"""

import numpy as np
from scipy.stats import rankdata

from gad_tree_bench.errors import DegenerateLabelsError, ValidationError
from gad_tree_bench.schemas import MetricReport


def _prepare(scores: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise ValidationError(f"dimension mismatch: {scores.shape} scores, {labels.shape} labels")
    if not np.isfinite(scores).all():
        raise ValidationError("scores must be finite")
    if not np.isin(labels, (0, 1)).all():
        raise ValidationError("labels must be 0 or 1")
    return scores, labels.astype(bool)


def auroc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability that a random positive outscores a random negative.

    Raises:
        DegenerateLabelsError: Fewer than one positive or one negative
    """
    scores, positive = _prepare(scores, labels)
    num_pos = int(positive.sum())
    num_neg = len(positive) - num_pos
    if num_pos == 0 or num_neg == 0:
        raise DegenerateLabelsError(f"AUROC needs both classes, got {num_pos} positives and {num_neg} negatives")
    ranks = rankdata(scores, method="average")
    wins = ranks[positive].sum() - num_pos * (num_pos + 1) / 2.0
    return float(wins / (num_pos * num_neg))


def average_precision(scores: np.ndarray, labels: np.ndarray) -> float:
    """Recall-increment-weighted precision over descending distinct-score thresholds.

    Raises:
        DegenerateLabelsError: No positives
    """
    scores, positive = _prepare(scores, labels)
    num_pos = int(positive.sum())
    if num_pos == 0:
        raise DegenerateLabelsError("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    ranked = scores[order]
    # Last position of every group of equal scores.
    ends = np.flatnonzero(np.append(ranked[1:] != ranked[:-1], True))
    hits = np.cumsum(positive[order])[ends]
    precision = hits / (ends + 1)
    recall = hits / num_pos
    return float(np.sum(np.diff(recall, prepend=0.0) * precision))


def _top_k_hits(scores: np.ndarray, positive: np.ndarray, k: int) -> int:
    if not 1 <= k <= len(scores):
        raise ValidationError(f"k out of range: k={k} for {len(scores)} scores")
    order = np.lexsort((np.arange(len(scores)), -scores))
    return int(positive[order[:k]].sum())


def recall_at_k(scores: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Fraction of all positives among the ``k`` top-scored nodes.

    Raises:
        ValidationError: ``k`` outside [1, n]
        DegenerateLabelsError: No positives
    """
    scores, positive = _prepare(scores, labels)
    num_pos = int(positive.sum())
    if num_pos == 0:
        raise DegenerateLabelsError("recall at k needs at least one positive")
    return _top_k_hits(scores, positive, k) / num_pos


def precision_at_k(scores: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Fraction of the ``k`` top-scored nodes that are positive."""
    scores, positive = _prepare(scores, labels)
    return _top_k_hits(scores, positive, k) / k


def evaluate(
    scores: np.ndarray,
    labels: np.ndarray,
    k: int | None = None,
    fit_seconds: float = 0.0,
    peak_memory_bytes: int = 0,
) -> MetricReport:
    """Bundle AUROC, AUPRC and Rec@K for one scored node set.

    Args:
        scores: One finite score per node
        labels: 0/1 labels aligned with ``scores``
        k: Rec@K cut-off; the number of positives when omitted
        fit_seconds: Wall-clock reported by the caller's instrumentation
        peak_memory_bytes: Peak memory reported by the caller's instrumentation

    Returns:
        The metric report

    Raises:
        DegenerateLabelsError: A class is missing
    """
    _, positive = _prepare(scores, labels)
    num_pos = int(positive.sum())
    k = num_pos if k is None else k
    return MetricReport(
        auroc=auroc(scores, labels),
        auprc=average_precision(scores, labels),
        rec_at_k=recall_at_k(scores, labels, k),
        k=k,
        num_pos=num_pos,
        num_neg=len(positive) - num_pos,
        fit_seconds=fit_seconds,
        peak_memory_bytes=peak_memory_bytes,
    )
