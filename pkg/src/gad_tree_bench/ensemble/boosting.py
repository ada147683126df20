"""Newton gradient boosting with logistic loss."""

import logging
import math

import numpy as np
from scipy.special import expit

from gad_tree_bench.ensemble.forest import check_binary_labels, tree_rng
from gad_tree_bench.ensemble.model import EnsembleModel, ModelKind
from gad_tree_bench.ensemble.params import BoostParams
from gad_tree_bench.ensemble.tree import GradientTargets, fit_tree
from gad_tree_bench.errors import DivergenceError, ValidationError

logger = logging.getLogger(__name__)


def logistic_loss(logit: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample loss ``log(1 + e^z) - y z``."""
    return np.logaddexp(0.0, logit) - y * logit


def logistic_gradients(logit: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of :func:`logistic_loss` in the logit."""
    p = expit(logit)
    return p - y, p * (1.0 - p)


def fit_gbt(
    X: np.ndarray,
    y: np.ndarray,
    params: BoostParams | None = None,
    seed: int = 0,
) -> EnsembleModel:
    """Fit gradient-boosted trees.

    Round ``t`` computes ``g = p - y`` and ``h = p(1 - p)`` at the current
    logits, fits a boosting-mode tree on a ``subsample`` fraction of rows drawn
    without replacement from stream ``SeedSequence([seed, t])``, and adds
    ``learning_rate`` times its output to every logit.

    Args:
        X: n x d finite training rows
        y: 0/1 labels with both classes present
        params: Boosting settings; defaults when omitted
        seed: Ensemble seed

    Returns:
        A boosted model

    Raises:
        DegenerateLabelsError: Only one class in ``y``
        DivergenceError: A logit, gradient or hessian became non-finite
    """
    params = params or BoostParams()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"features must be 2-D, got shape {X.shape}")
    y = check_binary_labels(y, X.shape[0])
    n = X.shape[0]
    settings = params.tree_settings()
    sample_weight = np.where(y == 1, params.pos_weight, 1.0)
    num_rows = math.ceil(params.subsample * n)

    logit = np.full(n, params.base_logit, dtype=np.float64)
    trees = []
    for round_index in range(params.n_estimators):
        grad, hess = logistic_gradients(logit, y)
        rng = tree_rng(seed, round_index)
        rows = np.sort(rng.choice(n, size=num_rows, replace=False)) if num_rows < n else None
        tree = fit_tree(X, GradientTargets(grad * sample_weight, hess * sample_weight), settings, rng, rows)
        logit += params.learning_rate * tree.predict(X)
        if not np.isfinite(logit).all():
            raise DivergenceError(f"non-finite logit after round {round_index}")
        trees.append(tree)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(
                "Round %d: %d nodes, training loss %.6f",
                round_index,
                tree.node_count,
                float(logistic_loss(logit, y).mean()),
            )

    return EnsembleModel(
        kind=ModelKind.BOOSTED,
        trees=tuple(trees),
        num_features=X.shape[1],
        params=params.model_dump(mode="json"),
        learning_rate=params.learning_rate,
        base_logit=params.base_logit,
    )
