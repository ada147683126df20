"""Neighbor aggregation features."""

from gad_tree_bench.features.aggregation import AggKind, StackedFeatures, aggregate_once, stack

__all__ = ["AggKind", "StackedFeatures", "aggregate_once", "stack"]
