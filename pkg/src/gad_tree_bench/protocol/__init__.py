"""Evaluation protocol: seeds, splits, families, repeated trials and random search."""

from gad_tree_bench.protocol.families import Family, GraphParams, Learner, ResolvedConfig, parse_family
from gad_tree_bench.protocol.search import random_search
from gad_tree_bench.protocol.search_space import (
    Choice,
    HyperSpace,
    LogUniform,
    RandInt,
    Uniform,
    sample_config,
)
from gad_tree_bench.protocol.seeding import derive_seed, splitmix64
from gad_tree_bench.protocol.splits import Setting, SplitSpec, full_split, make_split, named_split, semi_split
from gad_tree_bench.protocol.trials import FeatureCache, aggregate_repeats, run_trials

__all__ = [
    "Choice",
    "Family",
    "FeatureCache",
    "GraphParams",
    "HyperSpace",
    "Learner",
    "LogUniform",
    "RandInt",
    "ResolvedConfig",
    "Setting",
    "SplitSpec",
    "Uniform",
    "aggregate_repeats",
    "derive_seed",
    "full_split",
    "make_split",
    "named_split",
    "parse_family",
    "random_search",
    "run_trials",
    "sample_config",
    "semi_split",
    "splitmix64",
]
