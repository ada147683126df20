"""Parameter-free neighbor aggregation and layer stacking.

``stack`` produces ``[h0 | h1 | ... | hL]`` where ``h0`` is the raw feature
matrix and ``hl`` pools ``h(l-1)`` over each node's neighbors. Degree-0 rows
pool to zero for every kind, and self is a neighbor only through an explicit
self-loop edge.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import scipy.sparse as sp

from gad_tree_bench.errors import ValidationError
from gad_tree_bench.graph.csr import Graph
from gad_tree_bench.graph.dataset import FeatureMatrix

logger = logging.getLogger(__name__)

# Upper bound on gathered neighbor rows held at once by max pooling.
MAX_CHUNK_ENTRIES = 1 << 20


class AggKind(StrEnum):
    """Pooling function applied over a neighbor set."""

    MEAN = "mean"
    SUM = "sum"
    MAX = "max"


@dataclass(frozen=True, eq=False)
class StackedFeatures:
    """N x d(L+1) matrix with column blocks h0, h1, ..., hL."""

    values: np.ndarray
    base_dim: int
    num_layers: int
    kind: AggKind

    @property
    def num_nodes(self) -> int:
        """Number of rows N."""
        return self.values.shape[0]

    @property
    def layers(self) -> int:
        """Number of blocks, L + 1."""
        return self.num_layers + 1

    def block(self, layer: int) -> np.ndarray:
        """Column block ``h(layer)`` as a view."""
        if not 0 <= layer <= self.num_layers:
            raise ValidationError(f"layer must be in [0, {self.num_layers}], got {layer}")
        return self.values[:, layer * self.base_dim : (layer + 1) * self.base_dim]


def _as_array(X: FeatureMatrix | np.ndarray) -> np.ndarray:
    return X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)


def _row_ranges(indptr: np.ndarray, parts: int, max_entries: int | None = None) -> list[tuple[int, int]]:
    """Split rows into contiguous ranges of roughly equal entry counts."""
    num_rows = len(indptr) - 1
    total = int(indptr[-1])
    chunks = max(1, parts)
    if max_entries:
        chunks = max(chunks, -(-total // max_entries))
    chunks = min(chunks, max(1, num_rows))
    targets = np.linspace(0, total, chunks + 1)[1:-1]
    cuts = np.searchsorted(indptr, targets, side="left")
    bounds = np.unique(np.concatenate([[0], cuts, [num_rows]]))
    return list(zip(bounds[:-1].tolist(), bounds[1:].tolist(), strict=True))


def _adjacency_block(adjacency: sp.csr_matrix, start: int, stop: int) -> sp.csr_matrix:
    """Rows ``[start, stop)`` of a CSR matrix without copying entry arrays."""
    lo, hi = adjacency.indptr[start], adjacency.indptr[stop]
    return sp.csr_matrix(
        (adjacency.data[lo:hi], adjacency.indices[lo:hi], adjacency.indptr[start : stop + 1] - lo),
        shape=(stop - start, adjacency.shape[1]),
        copy=False,
    )


def _sum_pool(adjacency: sp.csr_matrix, X: np.ndarray, workers: int) -> np.ndarray:
    out = np.empty((adjacency.shape[0], X.shape[1]), dtype=np.float64)
    ranges = _row_ranges(adjacency.indptr, workers)

    def run(bounds: tuple[int, int]) -> None:
        start, stop = bounds
        # Each row is reduced left to right by one thread, so the result does
        # not depend on the worker count.
        out[start:stop] = _adjacency_block(adjacency, start, stop) @ X

    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, ranges))
    else:
        for bounds in ranges:
            run(bounds)
    return out


def _max_pool(adjacency: sp.csr_matrix, X: np.ndarray, workers: int) -> np.ndarray:
    indptr, indices = adjacency.indptr, adjacency.indices
    out = np.zeros((adjacency.shape[0], X.shape[1]), dtype=np.float64)
    ranges = _row_ranges(indptr, workers, MAX_CHUNK_ENTRIES)

    def run(bounds: tuple[int, int]) -> None:
        start, stop = bounds
        lo = indptr[start]
        local = indptr[start : stop + 1] - lo
        nonempty = np.flatnonzero(np.diff(local) > 0)
        if len(nonempty) == 0:
            return
        gathered = X[indices[lo : indptr[stop]]]
        out[start + nonempty] = np.maximum.reduceat(gathered, local[nonempty], axis=0)

    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, ranges))
    else:
        for bounds in ranges:
            run(bounds)
    return out


def _aggregate(adjacency: sp.csr_matrix, X: np.ndarray, kind: AggKind, workers: int) -> np.ndarray:
    if kind is AggKind.MAX:
        return _max_pool(adjacency, X, workers)
    pooled = _sum_pool(adjacency, X, workers)
    if kind is AggKind.MEAN:
        degrees = np.diff(adjacency.indptr).astype(np.float64)
        scale = np.divide(1.0, degrees, out=np.zeros_like(degrees), where=degrees > 0)
        pooled *= scale[:, None]
    return pooled


def _check_shapes(graph: Graph, X: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] != graph.num_nodes:
        raise ValidationError(
            f"dimension mismatch: graph has {graph.num_nodes} nodes, features have shape {X.shape}"
        )


def aggregate_once(
    graph: Graph,
    X: FeatureMatrix | np.ndarray,
    kind: AggKind | str = AggKind.MEAN,
    workers: int = 1,
) -> FeatureMatrix:
    """Pool every node's neighbor feature rows once.

    Multi-relation graphs are pooled over their merged view.

    Args:
        graph: Graph over N nodes
        X: N x d features
        kind: mean, sum or max
        workers: Threads working on disjoint row ranges

    Returns:
        N x d pooled features; degree-0 rows are zero

    Raises:
        ValidationError: Feature rows do not match the node count
    """
    values = _as_array(X)
    _check_shapes(graph, values)
    return FeatureMatrix(_aggregate(graph.adjacency, values, AggKind(kind), workers))


def stack(
    graph: Graph,
    X: FeatureMatrix | np.ndarray,
    num_layers: int = 2,
    kind: AggKind | str = AggKind.MEAN,
    workers: int = 1,
) -> StackedFeatures:
    """Concatenate raw features with ``num_layers`` rounds of aggregation.

    Args:
        graph: Graph over N nodes
        X: N x d features
        num_layers: L >= 0; L = 0 returns the raw features alone
        kind: mean, sum or max
        workers: Threads working on disjoint row ranges

    Returns:
        N x d(L+1) stacked features with block 0 equal to X

    Raises:
        ValidationError: Negative L or mismatched dimensions
    """
    if num_layers < 0:
        raise ValidationError(f"number of layers must be >= 0, got {num_layers}")
    kind = AggKind(kind)
    values = _as_array(X)
    _check_shapes(graph, values)
    num_nodes, dim = values.shape

    out = np.empty((num_nodes, dim * (num_layers + 1)), dtype=np.float64)
    out[:, :dim] = values
    adjacency = graph.adjacency if num_layers else None
    for layer in range(1, num_layers + 1):
        previous = np.ascontiguousarray(out[:, (layer - 1) * dim : layer * dim])
        out[:, layer * dim : (layer + 1) * dim] = _aggregate(adjacency, previous, kind, workers)
        logger.debug("Aggregated layer %d/%d (%s)", layer, num_layers, kind)

    out.setflags(write=False)
    return StackedFeatures(values=out, base_dim=dim, num_layers=num_layers, kind=kind)
