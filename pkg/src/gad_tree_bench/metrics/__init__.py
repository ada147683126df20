"""Evaluation metrics and resource bookkeeping."""

from gad_tree_bench.metrics.ranking import auroc, average_precision, evaluate, precision_at_k, recall_at_k
from gad_tree_bench.metrics.resources import ResourceMonitor, current_rss

__all__ = [
    "ResourceMonitor",
    "auroc",
    "average_precision",
    "current_rss",
    "evaluate",
    "precision_at_k",
    "recall_at_k",
]
