"""Neighborhood averaging of anomaly scores in feature space."""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gad_tree_bench.baselines.knn import nearest_neighbors
from gad_tree_bench.errors import ValidationError
from gad_tree_bench.graph.dataset import FeatureMatrix

logger = logging.getLogger(__name__)


class NaParams(BaseModel):
    """Neighborhood averaging settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_neighbors: int = Field(default=5, ge=0, description="Feature-space neighbors averaged with each score")


def neighborhood_average(
    scores: np.ndarray,
    X: FeatureMatrix | np.ndarray,
    params: NaParams | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Average every score with the scores of its nearest rows of ``X``.

    ``result_i`` is the uniform mean of ``score_i`` and the scores of the
    ``num_neighbors`` rows closest to row ``i`` (excluding ``i``; ties go to
    the lower index). The neighbor count is capped at ``len(scores) - 1``.

    Args:
        scores: One score per row of ``X``
        X: Feature rows the neighbors are searched in
        params: Neighbor count; 0 returns the scores unchanged
        workers: Threads for the neighbor search

    Returns:
        Smoothed scores within [min(scores), max(scores)]

    Raises:
        ValidationError: ``scores`` and ``X`` disagree in length
    """
    params = params or NaParams()
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or len(scores) != values.shape[0]:
        raise ValidationError(
            f"dimension mismatch: {len(scores)} scores for {values.shape[0]} feature rows"
        )
    k = min(params.num_neighbors, len(scores) - 1)
    if k < params.num_neighbors:
        logger.debug("Capping neighborhood size %d at %d rows", params.num_neighbors, k)
    if k <= 0:
        return scores.copy()
    neighbors = nearest_neighbors(values, values, k, exclude_self=True, workers=workers)
    return (scores + scores[neighbors].sum(axis=1)) / (k + 1)
