"""Random forests and gradient-boosted trees built from scratch."""

from gad_tree_bench.ensemble.boosting import fit_gbt, logistic_gradients, logistic_loss
from gad_tree_bench.ensemble.forest import fit_random_forest
from gad_tree_bench.ensemble.model import EnsembleModel, ModelKind, predict_scores
from gad_tree_bench.ensemble.params import BoostParams, ForestParams
from gad_tree_bench.ensemble.tree import (
    ClassTargets,
    Criterion,
    GradientTargets,
    SplitMode,
    Tree,
    TreeNode,
    TreeSettings,
    fit_tree,
)

__all__ = [
    "BoostParams",
    "ClassTargets",
    "Criterion",
    "EnsembleModel",
    "ForestParams",
    "GradientTargets",
    "ModelKind",
    "SplitMode",
    "Tree",
    "TreeNode",
    "TreeSettings",
    "fit_gbt",
    "fit_random_forest",
    "fit_tree",
    "logistic_gradients",
    "logistic_loss",
    "predict_scores",
]
