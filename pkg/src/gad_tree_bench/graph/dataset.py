"""Feature, label and dataset containers."""

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from gad_tree_bench.errors import DegenerateLabelsError, ValidationError
from gad_tree_bench.graph.csr import Graph

UNKNOWN = -1
NORMAL = 0
ANOMALOUS = 1

SPLIT_PARTS = ("train", "val", "test")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Dense row-major N x d float64 features; row i belongs to node i."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {values.shape}")
        if not np.isfinite(values).all():
            row = int(np.argmax(~np.isfinite(values).all(axis=1)))
            raise ValidationError(f"non-finite feature value in row {row}", index=row)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def num_nodes(self) -> int:
        """Number of rows N."""
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        """Number of columns d."""
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class LabelTable:
    """Per-node labels in {NORMAL, ANOMALOUS, UNKNOWN}."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.int8)
        if labels.ndim != 1:
            raise ValidationError("labels must be 1-D")
        if not np.isin(labels, (UNKNOWN, NORMAL, ANOMALOUS)).all():
            raise ValidationError("labels must be 0, 1 or unknown")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if self.num_pos < 1 or self.num_neg < 1:
            raise DegenerateLabelsError(
                f"need at least one known positive and one known negative, "
                f"got {self.num_pos} positives and {self.num_neg} negatives"
            )

    @classmethod
    def from_known(cls, num_nodes: int, known: Mapping[int, int]) -> "LabelTable":
        """Build a table where unlisted nodes are unknown."""
        labels = np.full(num_nodes, UNKNOWN, dtype=np.int8)
        for node, label in known.items():
            labels[node] = label
        return cls(labels)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def num_pos(self) -> int:
        """Known anomalous nodes."""
        return int(np.count_nonzero(self.labels == ANOMALOUS))

    @property
    def num_neg(self) -> int:
        """Known normal nodes."""
        return int(np.count_nonzero(self.labels == NORMAL))

    def known_ids(self) -> np.ndarray:
        """Ascending ids of labeled nodes."""
        return np.flatnonzero(self.labels != UNKNOWN)

    def positive_ids(self) -> np.ndarray:
        """Ascending ids of known anomalies."""
        return np.flatnonzero(self.labels == ANOMALOUS)

    def negative_ids(self) -> np.ndarray:
        """Ascending ids of known normal nodes."""
        return np.flatnonzero(self.labels == NORMAL)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Graph, features and partial labels for one GAD problem."""

    graph: Graph
    features: FeatureMatrix
    labels: LabelTable
    name: str = "dataset"
    meta: dict[str, Any] = field(default_factory=dict)
    # Named pre-existing splits: name -> {"train"|"val"|"test": node ids}
    splits: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = self.graph.num_nodes
        if self.features.num_nodes != n or len(self.labels) != n:
            raise ValidationError(
                f"dimension mismatch: graph has {n} nodes, features {self.features.num_nodes} rows, "
                f"labels {len(self.labels)} entries"
            )
        for split_name, parts in self.splits.items():
            for part, ids in parts.items():
                if part not in SPLIT_PARTS:
                    raise ValidationError(f"split {split_name!r} has unknown part {part!r}")
                ids = np.asarray(ids, dtype=np.int64)
                if len(ids) and (ids.min() < 0 or ids.max() >= n):
                    raise ValidationError(f"split {split_name!r} part {part!r}: node id out of range")

    @property
    def num_nodes(self) -> int:
        """Number of nodes N."""
        return self.graph.num_nodes

    def summary(self) -> dict[str, Any]:
        """Headline counts for logs and CLI output."""
        return {
            "name": self.name,
            "num_nodes": self.num_nodes,
            "num_relations": self.graph.num_relations,
            "num_entries": self.graph.num_entries,
            "num_edges": self.graph.num_edges(),
            "feature_dim": self.features.dim,
            "num_pos": self.labels.num_pos,
            "num_neg": self.labels.num_neg,
            "anomaly_ratio": self.labels.num_pos / max(1, self.labels.num_pos + self.labels.num_neg),
        }

    def summary_line(self) -> str:
        """One-line human-readable summary."""
        info = self.summary()
        return (
            f"{info['name']}: N={info['num_nodes']} edges={info['num_edges']} d={info['feature_dim']} "
            f"anomalies={info['num_pos']} normals={info['num_neg']}"
        )
