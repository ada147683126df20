"""Bagged random forests of classification trees."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from gad_tree_bench.ensemble.model import EnsembleModel, ModelKind
from gad_tree_bench.ensemble.params import ForestParams
from gad_tree_bench.ensemble.tree import ClassTargets, Tree, fit_tree
from gad_tree_bench.errors import DegenerateLabelsError, ValidationError

logger = logging.getLogger(__name__)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Independent stream for tree ``tree_index`` of an ensemble seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, tree_index]))


def check_binary_labels(y: np.ndarray, num_rows: int) -> np.ndarray:
    """Validate training labels; both classes must be present."""
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != num_rows:
        raise ValidationError(f"label length {len(y)} does not match {num_rows} rows")
    if num_rows == 0:
        raise ValidationError("empty input: need at least one sample")
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("training labels must be 0 or 1")
    if y.min() == y.max():
        raise DegenerateLabelsError(f"single-class training labels: every label is {int(y[0])}")
    return y.astype(np.float64)


def fit_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: ForestParams | None = None,
    seed: int = 0,
    workers: int = 1,
) -> EnsembleModel:
    """Fit a random forest.

    Tree ``t`` draws ``ceil(max_samples * n)`` rows with replacement from its
    own stream ``SeedSequence([seed, t])``; drawn multiplicities become sample
    weights. Trees train in parallel, and the result does not depend on
    ``workers``.

    Args:
        X: n x d finite training rows
        y: 0/1 labels with both classes present
        params: Forest settings; defaults when omitted
        seed: Ensemble seed
        workers: Threads fitting trees concurrently

    Returns:
        A forest model

    Raises:
        DegenerateLabelsError: Only one class in ``y``
        ValidationError: Empty or misshapen input
    """
    params = params or ForestParams()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"features must be 2-D, got shape {X.shape}")
    y = check_binary_labels(y, X.shape[0])
    n = X.shape[0]
    settings = params.tree_settings(X.shape[1])
    class_weight = np.where(y == 1, params.pos_weight, 1.0)
    num_draws = math.ceil(params.max_samples * n)

    def fit_one(tree_index: int) -> Tree:
        rng = tree_rng(seed, tree_index)
        if params.bootstrap:
            counts = np.bincount(rng.integers(0, n, size=num_draws), minlength=n)
            rows = np.flatnonzero(counts)
            weight = counts * class_weight
        else:
            rows, weight = None, class_weight
        return fit_tree(X, ClassTargets(y, weight), settings, rng, rows)

    if workers > 1 and params.n_estimators > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = tuple(pool.map(fit_one, range(params.n_estimators)))
    else:
        trees = tuple(fit_one(index) for index in range(params.n_estimators))

    logger.debug(
        "Fitted forest: %d trees, %d total nodes on %d x %d",
        len(trees),
        sum(tree.node_count for tree in trees),
        n,
        X.shape[1],
    )
    return EnsembleModel(
        kind=ModelKind.FOREST,
        trees=trees,
        num_features=X.shape[1],
        params=params.model_dump(mode="json"),
    )
