"""Reading and writing the on-disk dataset directory format.

A dataset directory holds:

    meta.json     {"num_nodes", "num_relations", "feature_dim", "directed", "name"[, "meta"]}
    edges.tsv     src<TAB>dst[<TAB>rel] per line, 0-based; rel defaults to 0
    features.tsv  one node per line in id order, feature_dim tab-separated decimals
    labels.tsv    node_id<TAB>label per labeled node, label in {0, 1}
    splits.json   optional {"<name>": {"train": [...], "val": [...], "test": [...]}}
"""

import json
import logging
import math
import re
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from gad_tree_bench.errors import DatasetFormatError, GadError
from gad_tree_bench.graph.csr import build_csr
from gad_tree_bench.graph.dataset import SPLIT_PARTS, UNKNOWN, Dataset, FeatureMatrix, LabelTable

logger = logging.getLogger(__name__)

META_FILE = "meta.json"
EDGES_FILE = "edges.tsv"
FEATURES_FILE = "features.tsv"
LABELS_FILE = "labels.tsv"
SPLITS_FILE = "splits.json"

# 17 significant digits round-trips every float64 exactly.
FLOAT_FORMAT = ".17g"

_LOOSE_SEPARATOR = re.compile(r"[\s,]+")


class DatasetMeta(BaseModel):
    """Schema of meta.json."""

    model_config = ConfigDict(extra="forbid")

    num_nodes: int = Field(ge=0, description="Number of nodes N")
    num_relations: int = Field(default=1, ge=1, description="Number of edge relations")
    feature_dim: int = Field(ge=1, description="Feature columns d")
    directed: bool = Field(default=False, description="Whether edges keep their direction")
    name: str = Field(default="dataset", description="Dataset name")
    meta: dict[str, Any] = Field(default_factory=dict, description="Free-form provenance")


def _iter_rows(path: Path, separator: str | re.Pattern[str] = "\t") -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, fields)`` for every non-blank line of ``path``."""
    if not path.exists():
        raise DatasetFormatError("missing file", path=str(path))
    with open(path, "rb") as file:
        for line_number, raw in enumerate(file, start=1):
            try:
                line = raw.decode("utf-8").strip()
            except UnicodeDecodeError as exc:
                raise DatasetFormatError(f"not UTF-8 text: {exc.reason}", path=str(path), line=line_number) from exc
            if not line or line.startswith("#"):
                continue
            if isinstance(separator, str):
                yield line_number, line.split(separator)
            else:
                yield line_number, _LOOSE_SEPARATOR.split(line)


def _read_meta(directory: Path) -> DatasetMeta:
    path = directory / META_FILE
    if not path.exists():
        raise DatasetFormatError("missing file", path=str(path))
    try:
        return DatasetMeta(**json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, UnicodeDecodeError, TypeError) as exc:
        raise DatasetFormatError(f"malformed JSON: {exc}", path=str(path)) from exc
    except pydantic.ValidationError as exc:
        raise DatasetFormatError(f"invalid metadata: {exc.errors()[0]['msg']}", path=str(path)) from exc


def _read_edges(path: Path, separator: str | re.Pattern[str] = "\t") -> np.ndarray:
    rows: list[tuple[int, int, int]] = []
    for line_number, fields in _iter_rows(path, separator):
        if len(fields) not in (2, 3):
            raise DatasetFormatError(
                f"expected 2 or 3 fields, got {len(fields)}", path=str(path), line=line_number
            )
        try:
            src, dst = int(fields[0]), int(fields[1])
            rel = int(fields[2]) if len(fields) == 3 else 0
        except ValueError as exc:
            raise DatasetFormatError("non-integer edge field", path=str(path), line=line_number) from exc
        rows.append((src, dst, rel))
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def _read_features(
    path: Path, dim: int | None, separator: str | re.Pattern[str] = "\t"
) -> np.ndarray:
    rows: list[list[float]] = []
    for line_number, fields in _iter_rows(path, separator):
        if dim is None:
            dim = len(fields)
        if len(fields) != dim:
            raise DatasetFormatError(
                f"expected {dim} features, got {len(fields)}", path=str(path), line=line_number
            )
        try:
            row = [float(value) for value in fields]
        except ValueError as exc:
            raise DatasetFormatError("malformed decimal", path=str(path), line=line_number) from exc
        if not all(math.isfinite(value) for value in row):
            raise DatasetFormatError("non-finite feature (NaN or infinity)", path=str(path), line=line_number)
        rows.append(row)
    return np.array(rows, dtype=np.float64).reshape(len(rows), dim or 0)


def _read_labels(path: Path, num_nodes: int, separator: str | re.Pattern[str] = "\t") -> np.ndarray:
    labels = np.full(num_nodes, UNKNOWN, dtype=np.int8)
    for line_number, fields in _iter_rows(path, separator):
        if len(fields) != 2:
            raise DatasetFormatError(f"expected 2 fields, got {len(fields)}", path=str(path), line=line_number)
        try:
            node, label = int(fields[0]), int(fields[1])
        except ValueError as exc:
            raise DatasetFormatError("non-integer label field", path=str(path), line=line_number) from exc
        if not 0 <= node < num_nodes:
            raise DatasetFormatError(f"node id out of range: {node}", path=str(path), line=line_number)
        if label not in (0, 1):
            raise DatasetFormatError(f"label must be 0 or 1, got {label}", path=str(path), line=line_number)
        if labels[node] != UNKNOWN:
            raise DatasetFormatError(f"duplicate label for node {node}", path=str(path), line=line_number)
        labels[node] = label
    return labels


def _read_splits(path: Path) -> dict[str, dict[str, np.ndarray]]:
    if not path.exists():
        return {}
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DatasetFormatError(f"malformed JSON: {exc}", path=str(path)) from exc
    if not isinstance(raw, dict):
        raise DatasetFormatError("expected an object of named splits", path=str(path))
    splits: dict[str, dict[str, np.ndarray]] = {}
    for name, parts in raw.items():
        if not isinstance(parts, dict) or set(parts) != set(SPLIT_PARTS):
            raise DatasetFormatError(f"split {name!r} must have exactly train/val/test", path=str(path))
        splits[name] = {part: np.asarray(parts[part], dtype=np.int64) for part in SPLIT_PARTS}
    return splits


def _wrap(path: Path, exc: GadError) -> DatasetFormatError:
    if isinstance(exc, DatasetFormatError):
        return exc
    return DatasetFormatError(exc.message, path=str(path), index=getattr(exc, "index", None))


def load_dataset(directory: str | Path) -> Dataset:
    """Load and validate a dataset directory.

    Args:
        directory: Path to a directory in the dataset format

    Returns:
        The validated dataset

    Raises:
        DatasetFormatError: Missing file, malformed line (with line number),
            dimension mismatch or non-finite feature
    """
    directory = Path(directory)
    meta = _read_meta(directory)

    features = _read_features(directory / FEATURES_FILE, meta.feature_dim)
    if features.shape[0] != meta.num_nodes:
        raise DatasetFormatError(
            f"dimension mismatch: meta declares {meta.num_nodes} nodes, found {features.shape[0]} feature rows",
            path=str(directory / FEATURES_FILE),
        )

    edges_path = directory / EDGES_FILE
    edges = _read_edges(edges_path)
    try:
        graph = build_csr(edges, meta.num_nodes, meta.num_relations, meta.directed)
    except GadError as exc:
        raise _wrap(edges_path, exc) from exc

    labels_path = directory / LABELS_FILE
    try:
        labels = LabelTable(_read_labels(labels_path, meta.num_nodes))
    except DatasetFormatError:
        raise
    except GadError as exc:
        raise _wrap(labels_path, exc) from exc

    splits_path = directory / SPLITS_FILE
    try:
        dataset = Dataset(
            graph=graph,
            features=FeatureMatrix(features),
            labels=labels,
            name=meta.name,
            meta=meta.meta,
            splits=_read_splits(splits_path),
        )
    except DatasetFormatError:
        raise
    except GadError as exc:
        raise _wrap(splits_path, exc) from exc

    logger.info("Loaded %s", dataset.summary_line())
    return dataset


def save_dataset(dataset: Dataset, directory: str | Path) -> Path:
    """Write ``dataset`` in the directory format.

    Output is a pure function of the dataset, so saving the same dataset twice
    produces byte-identical files.

    Args:
        dataset: Dataset to write
        directory: Target directory, created if needed

    Returns:
        The directory path
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    graph = dataset.graph

    meta = DatasetMeta(
        num_nodes=graph.num_nodes,
        num_relations=graph.num_relations,
        feature_dim=dataset.features.dim,
        directed=graph.directed,
        name=dataset.name,
        meta=dataset.meta,
    )
    (directory / META_FILE).write_text(
        json.dumps(meta.model_dump(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    edges = graph.edge_list()
    if not graph.directed:
        # Stored twice; write each undirected edge once.
        edges = edges[edges[:, 0] <= edges[:, 1]]
    with open(directory / EDGES_FILE, "w", encoding="utf-8", newline="\n") as file:
        for src, dst, rel in edges.tolist():
            file.write(f"{src}\t{dst}\t{rel}\n")

    with open(directory / FEATURES_FILE, "w", encoding="utf-8", newline="\n") as file:
        for row in dataset.features.values.tolist():
            file.write("\t".join(format(value, FLOAT_FORMAT) for value in row) + "\n")

    with open(directory / LABELS_FILE, "w", encoding="utf-8", newline="\n") as file:
        labels = dataset.labels.labels
        for node in dataset.labels.known_ids().tolist():
            file.write(f"{node}\t{int(labels[node])}\n")

    if dataset.splits:
        splits = {
            name: {part: np.asarray(ids).tolist() for part, ids in parts.items()}
            for name, parts in dataset.splits.items()
        }
        (directory / SPLITS_FILE).write_text(json.dumps(splits, sort_keys=True) + "\n", encoding="utf-8")

    logger.info("Wrote %s to %s", dataset.summary_line(), directory)
    return directory


def convert_text_files(
    edges_path: str | Path,
    features_path: str | Path,
    labels_path: str | Path,
    name: str = "dataset",
    directed: bool = False,
    splits_path: str | Path | None = None,
) -> Dataset:
    """Ingest plain edge-list, feature and label text files.

    Fields may be separated by whitespace or commas. The node count is the
    number of feature rows; the relation count is one more than the largest
    relation id seen.

    Args:
        edges_path: ``src dst [rel]`` per line
        features_path: One feature row per node, in node-id order
        labels_path: ``node label`` per labeled node
        name: Dataset name
        directed: Keep edge direction
        splits_path: Optional splits.json to attach

    Returns:
        The validated dataset, ready for :func:`save_dataset`
    """
    edges_path, features_path, labels_path = Path(edges_path), Path(features_path), Path(labels_path)
    features = _read_features(features_path, None, _LOOSE_SEPARATOR)
    num_nodes = features.shape[0]
    edges = _read_edges(edges_path, _LOOSE_SEPARATOR)
    num_relations = int(edges[:, 2].max()) + 1 if len(edges) else 1
    try:
        graph = build_csr(edges, num_nodes, num_relations, directed)
    except GadError as exc:
        raise _wrap(edges_path, exc) from exc
    labels = LabelTable(_read_labels(labels_path, num_nodes, _LOOSE_SEPARATOR))
    splits = _read_splits(Path(splits_path)) if splits_path else {}
    return Dataset(
        graph=graph,
        features=FeatureMatrix(features),
        labels=labels,
        name=name,
        meta={"source": {"edges": edges_path.name, "features": features_path.name, "labels": labels_path.name}},
        splits=splits,
    )
