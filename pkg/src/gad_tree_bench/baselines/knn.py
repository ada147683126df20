"""Exact brute-force k-nearest-neighbor search and KNN scoring."""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gad_tree_bench.errors import ValidationError

logger = logging.getLogger(__name__)

# Upper bound on query x reference x dim difference entries held per chunk.
MAX_CHUNK_ENTRIES = 1 << 22


class KnnParams(BaseModel):
    """KNN classifier settings; the metric is always euclidean."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k: int = Field(default=5, ge=1, description="Neighbors voting on each query")


def _query_chunks(num_queries: int, num_reference: int, dim: int) -> list[tuple[int, int]]:
    per_query = max(1, num_reference * max(dim, 1))
    size = max(1, MAX_CHUNK_ENTRIES // per_query)
    return [(start, min(start + size, num_queries)) for start in range(0, num_queries, size)]


def nearest_neighbors(
    reference: np.ndarray,
    queries: np.ndarray,
    k: int,
    exclude_self: bool = False,
    workers: int = 1,
) -> np.ndarray:
    """Indices of the ``k`` nearest reference rows of every query row.

    Distances are exact squared euclidean distances computed from coordinate
    differences; equal distances resolve to the lower reference index.

    Args:
        reference: n x d rows to search
        queries: q x d rows to answer
        k: Neighbors per query, at most the number of candidates
        exclude_self: Queries are the reference rows themselves; row ``i`` never
            returns itself
        workers: Threads answering disjoint query chunks

    Returns:
        q x k neighbor indices ordered by distance
    """
    reference = np.asarray(reference, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    if reference.ndim != 2 or queries.ndim != 2 or reference.shape[1] != queries.shape[1]:
        raise ValidationError(
            f"dimension mismatch: reference {reference.shape}, queries {queries.shape}"
        )
    out = np.empty((queries.shape[0], k), dtype=np.int64)
    if k == 0 or queries.shape[0] == 0:
        return out

    def run(bounds: tuple[int, int]) -> None:
        start, stop = bounds
        diffs = queries[start:stop, None, :] - reference[None, :, :]
        distances = np.einsum("qnd,qnd->qn", diffs, diffs)
        if exclude_self:
            rows = np.arange(stop - start)
            distances[rows, start + rows] = np.inf
        out[start:stop] = np.argsort(distances, axis=1, kind="stable")[:, :k]

    chunks = _query_chunks(queries.shape[0], reference.shape[0], reference.shape[1])
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    else:
        for bounds in chunks:
            run(bounds)
    return out


def knn_scores(
    train_X: np.ndarray,
    train_y: np.ndarray,
    query_X: np.ndarray,
    params: KnnParams | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Fraction of anomalous labels among each query's k nearest training rows.

    Args:
        train_X: n x d training rows
        train_y: 0/1 training labels
        query_X: q x d rows to score
        params: Neighbor count
        workers: Threads answering disjoint query chunks

    Returns:
        Scores in {0, 1/k, ..., 1}

    Raises:
        ValidationError: k exceeds the training size, or dimensions differ
    """
    params = params or KnnParams()
    train_y = np.asarray(train_y, dtype=np.float64)
    if len(train_y) != len(train_X):
        raise ValidationError(f"label length {len(train_y)} does not match {len(train_X)} training rows")
    if params.k > len(train_y):
        raise ValidationError(f"k={params.k} exceeds the training size {len(train_y)}")
    neighbors = nearest_neighbors(train_X, query_X, params.k, workers=workers)
    return train_y[neighbors].mean(axis=1)
