"""Fitted tree ensembles: scoring and JSON persistence."""

import json
import logging
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np
from scipy.special import expit

from gad_tree_bench.ensemble.tree import Tree
from gad_tree_bench.errors import ValidationError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class ModelKind(StrEnum):
    """How tree outputs combine into a score."""

    FOREST = "forest"
    BOOSTED = "boosted"


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    """An immutable fitted forest or boosted ensemble.

    Forest scores are the mean of leaf positive fractions. Boosted scores are
    ``sigmoid(base_logit + learning_rate * sum(tree outputs))``. Either way
    every score lies in [0, 1].
    """

    kind: ModelKind
    trees: tuple[Tree, ...]
    num_features: int
    params: dict[str, Any] = field(default_factory=dict)
    learning_rate: float = 1.0
    base_logit: float = 0.0

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        """Forest mean, or the boosted logit before the sigmoid."""
        X = self._check_input(X)
        if self.kind is ModelKind.FOREST:
            if not self.trees:
                return np.zeros(X.shape[0])
            total = np.zeros(X.shape[0])
            for tree in self.trees:
                total += tree.predict(X)
            return total / len(self.trees)
        logit = np.full(X.shape[0], self.base_logit, dtype=np.float64)
        for tree in self.trees:
            logit += self.learning_rate * tree.predict(X)
        return logit

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.num_features:
            raise ValidationError(
                f"dimension mismatch: model was trained on {self.num_features} features, got shape {X.shape}"
            )
        return X

    def to_dict(self) -> dict[str, Any]:
        """Self-describing document with flattened tree arrays."""
        return {
            "format_version": FORMAT_VERSION,
            "kind": str(self.kind),
            "num_features": self.num_features,
            "learning_rate": self.learning_rate,
            "base_logit": self.base_logit,
            "params": self.params,
            "trees": [
                {
                    "feature": tree.feature.tolist(),
                    "threshold": tree.threshold.tolist(),
                    "left": tree.left.tolist(),
                    "right": tree.right.tolist(),
                    "value": tree.value.tolist(),
                }
                for tree in self.trees
            ],
        }

    def to_json(self) -> str:
        """Serialise to JSON; floats round-trip exactly."""
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, document: str | dict[str, Any]) -> "EnsembleModel":
        """Rebuild a model written by :meth:`to_json`.

        Raises:
            ValidationError: Unknown format version or malformed document
        """
        data = json.loads(document) if isinstance(document, str) else document
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise ValidationError(f"unsupported model format version: {version}")
        try:
            trees = tuple(
                Tree(
                    feature=np.asarray(entry["feature"], dtype=np.int64),
                    threshold=np.asarray(entry["threshold"], dtype=np.float64),
                    left=np.asarray(entry["left"], dtype=np.int64),
                    right=np.asarray(entry["right"], dtype=np.int64),
                    value=np.asarray(entry["value"], dtype=np.float64),
                )
                for entry in data["trees"]
            )
            return cls(
                kind=ModelKind(data["kind"]),
                trees=trees,
                num_features=int(data["num_features"]),
                params=dict(data.get("params", {})),
                learning_rate=float(data["learning_rate"]),
                base_logit=float(data["base_logit"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed model document: {exc}") from exc


def predict_scores(model: EnsembleModel, X: np.ndarray) -> np.ndarray:
    """Anomaly scores in [0, 1] for every row of ``X``.

    Args:
        model: A fitted ensemble
        X: Rows with the training column count

    Returns:
        One deterministic score per row

    Raises:
        ValidationError: Column count differs from training
    """
    raw = model.raw_scores(X)
    if model.kind is ModelKind.BOOSTED:
        return expit(raw)
    return raw
