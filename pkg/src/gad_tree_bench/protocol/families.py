"""Model families: name parsing, configuration and fit-and-score.

A family name is a base learner (``rf``, ``xgb``, ``knn``), optionally with
``-graph`` for tree learners to train on stacked aggregated features, and
optionally suffixed ``+na`` to post-process scores by neighborhood averaging.
"""

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from gad_tree_bench.baselines import KnnParams, NaParams, knn_scores
from gad_tree_bench.ensemble import BoostParams, EnsembleModel, ForestParams, fit_gbt, fit_random_forest, predict_scores
from gad_tree_bench.errors import UnknownFamilyError, ValidationError
from gad_tree_bench.features import AggKind
from gad_tree_bench.protocol.search_space import (
    BOOST_SPACE,
    FOREST_SPACE,
    GRAPH_SPACE,
    KNN_SPACE,
    NA_SPACE,
    HyperSpace,
)

logger = logging.getLogger(__name__)

GRAPH_SUFFIX = "-graph"
NA_SUFFIX = "+na"

# Short names accepted by --set.
KEY_ALIASES = {"L": "layers", "kind": "agg", "eta": "learning_rate", "lambda": "l2_lambda"}


class Learner(StrEnum):
    """Base scoring model."""

    RF = "rf"
    XGB = "xgb"
    KNN = "knn"


class GraphParams(BaseModel):
    """Neighbor aggregation applied before training."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    layers: int = Field(default=2, ge=0, description="Aggregation layers L; 0 trains on raw features")
    agg: AggKind = Field(default=AggKind.MEAN, description="Pooling function")


_LEARNER_PARAMS: dict[Learner, type[BaseModel]] = {
    Learner.RF: ForestParams,
    Learner.XGB: BoostParams,
    Learner.KNN: KnnParams,
}

_LEARNER_SPACES: dict[Learner, HyperSpace] = {
    Learner.RF: FOREST_SPACE,
    Learner.XGB: BOOST_SPACE,
    Learner.KNN: KNN_SPACE,
}


@dataclass(frozen=True)
class ResolvedConfig:
    """Validated settings of every stage a family runs."""

    learner: BaseModel
    graph: GraphParams | None = None
    na: NaParams | None = None

    def as_dict(self) -> dict[str, Any]:
        """Flat JSON-ready snapshot: learner keys, then graph keys, then NA keys."""
        snapshot = self.learner.model_dump(mode="json")
        if self.graph is not None:
            snapshot.update(self.graph.model_dump(mode="json"))
        if self.na is not None:
            snapshot.update(self.na.model_dump(mode="json"))
        return snapshot


@dataclass(frozen=True)
class Family:
    """A parsed family name."""

    name: str
    learner: Learner
    graph: bool = False
    na: bool = False

    def search_space(self) -> dict[str, Any]:
        """Random-search distributions for every tunable key."""
        space = dict(_LEARNER_SPACES[self.learner])
        if self.graph:
            space.update(GRAPH_SPACE)
        if self.na:
            space.update(NA_SPACE)
        return space

    def resolve(self, overrides: Mapping[str, Any] | None = None) -> ResolvedConfig:
        """Defaults updated with ``overrides``, validated.

        Raises:
            ValidationError: Unknown key or invalid value
        """
        pending = {KEY_ALIASES.get(key, key): value for key, value in (overrides or {}).items()}
        stages: list[tuple[str, type[BaseModel]]] = [("learner", _LEARNER_PARAMS[self.learner])]
        if self.graph:
            stages.append(("graph", GraphParams))
        if self.na:
            stages.append(("na", NaParams))

        resolved: dict[str, BaseModel] = {}
        for stage, model in stages:
            values = {key: pending.pop(key) for key in list(pending) if key in model.model_fields}
            try:
                resolved[stage] = model(**values)
            except pydantic.ValidationError as exc:
                error = exc.errors()[0]
                field = ".".join(str(part) for part in error["loc"])
                raise ValidationError(f"invalid value for {field!r} in family {self.name}: {error['msg']}") from exc
        if pending:
            unknown = ", ".join(sorted(pending))
            raise ValidationError(f"unknown hyperparameter(s) for family {self.name}: {unknown}")
        return ResolvedConfig(**resolved)


def parse_family(name: str) -> Family:
    """Parse ``name`` into a family.

    Raises:
        UnknownFamilyError: Not one of rf, xgb, knn, rf-graph, xgb-graph, with
            or without ``+na``
    """
    base = name.strip().lower()
    na = base.endswith(NA_SUFFIX)
    if na:
        base = base[: -len(NA_SUFFIX)]
    graph = base.endswith(GRAPH_SUFFIX)
    if graph:
        base = base[: -len(GRAPH_SUFFIX)]
    try:
        learner = Learner(base)
    except ValueError:
        learner = None
    if learner is None or (graph and learner is Learner.KNN):
        raise UnknownFamilyError(
            f"unknown family: {name!r} (expected rf, xgb, knn, rf-graph or xgb-graph, optionally with +na)"
        )
    return Family(name=name.strip().lower(), learner=learner, graph=graph, na=na)


@dataclass(frozen=True)
class FittedScorer:
    """Scores of every query set, plus the ensemble when the learner has one."""

    scores: list[np.ndarray]
    model: EnsembleModel | None = None


def fit_and_score(
    config: ResolvedConfig,
    train_X: np.ndarray,
    train_y: np.ndarray,
    queries: list[np.ndarray],
    seed: int,
    workers: int = 1,
) -> FittedScorer:
    """Train the configured learner and score each query matrix.

    Args:
        config: Resolved family configuration
        train_X: Training rows (already aggregated when the family is a graph one)
        train_y: 0/1 training labels
        queries: Matrices to score with the fitted learner
        seed: Model seed
        workers: Threads for tree fitting and neighbor search

    Returns:
        One score vector per query matrix
    """
    params = config.learner
    if isinstance(params, ForestParams):
        model = fit_random_forest(train_X, train_y, params, seed, workers)
    elif isinstance(params, BoostParams):
        model = fit_gbt(train_X, train_y, params, seed)
    else:
        k = min(params.k, len(train_y))
        if k < params.k:
            logger.debug("Capping k=%d at the training size %d", params.k, k)
        knn = KnnParams(k=k)
        return FittedScorer([knn_scores(train_X, train_y, query, knn, workers) for query in queries])
    return FittedScorer([predict_scores(model, query) for query in queries], model)
