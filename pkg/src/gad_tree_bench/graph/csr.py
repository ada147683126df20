"""Immutable multi-relation CSR graphs."""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from gad_tree_bench.errors import ValidationError

logger = logging.getLogger(__name__)

EdgeInput = Iterable[Sequence[int]] | np.ndarray


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class CsrRelation:
    """One relation's adjacency in compressed sparse row form.

    Row ``i`` lists the neighbors of node ``i``: for a directed graph these are
    the sources of edges pointing into ``i``.
    """

    indptr: np.ndarray
    indices: np.ndarray

    @property
    def num_entries(self) -> int:
        """Number of stored (directed) entries."""
        return int(self.indptr[-1])

    def degrees(self) -> np.ndarray:
        """Per-node neighbor counts."""
        return np.diff(self.indptr)

    def neighbors(self, node: int) -> np.ndarray:
        """Sorted neighbor ids of ``node``."""
        return self.indices[self.indptr[node] : self.indptr[node + 1]]

    def keys(self, num_nodes: int) -> np.ndarray:
        """Row-major entry keys ``row * num_nodes + col`` in storage order."""
        rows = np.repeat(np.arange(len(self.indptr) - 1, dtype=np.int64), self.degrees())
        return rows * num_nodes + self.indices


def _relation_from_keys(keys: np.ndarray, num_nodes: int) -> CsrRelation:
    """Build a relation from sorted, unique row-major keys."""
    rows = keys // num_nodes if num_nodes else keys
    cols = keys - rows * num_nodes
    counts = np.bincount(rows, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return CsrRelation(indptr=_frozen(indptr), indices=_frozen(cols.astype(np.int64)))


@dataclass(frozen=True, eq=False)
class Graph:
    """Sparse graph over ``num_nodes`` nodes with one CSR structure per relation.

    Structural invariants are checked on construction; symmetry of undirected
    graphs is guaranteed by :func:`build_csr` and can be re-checked with
    :meth:`check_symmetric`.
    """

    num_nodes: int
    relations: tuple[CsrRelation, ...]
    directed: bool = False

    def __post_init__(self) -> None:
        if self.num_nodes < 0:
            raise ValidationError("num_nodes must be non-negative")
        if not self.relations:
            raise ValidationError("graph needs at least one relation")
        for rel_id, relation in enumerate(self.relations):
            indptr, indices = relation.indptr, relation.indices
            if len(indptr) != self.num_nodes + 1 or indptr[0] != 0:
                raise ValidationError("malformed row offsets", index=rel_id)
            if np.any(np.diff(indptr) < 0) or indptr[-1] != len(indices):
                raise ValidationError("row offsets must be non-decreasing and end at the edge count", index=rel_id)
            if len(indices) and (indices.min() < 0 or indices.max() >= self.num_nodes):
                raise ValidationError("column index out of range", index=rel_id)
            # Strictly increasing within each row: a non-positive step is only
            # allowed where a new row starts.
            steps = np.diff(indices)
            row_starts = np.zeros(len(indices), dtype=bool)
            row_starts[indptr[1:-1][indptr[1:-1] < len(indices)]] = True
            if np.any((steps <= 0) & ~row_starts[1:]):
                raise ValidationError("row entries must be strictly increasing", index=rel_id)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.directed == other.directed
            and len(self.relations) == len(other.relations)
            and all(
                np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
                for a, b in zip(self.relations, other.relations, strict=True)
            )
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def num_relations(self) -> int:
        """Number of relations."""
        return len(self.relations)

    @property
    def num_entries(self) -> int:
        """Stored entries summed over relations (undirected edges count twice)."""
        return sum(relation.num_entries for relation in self.relations)

    def degrees(self, relation: int = 0) -> np.ndarray:
        """Per-node degree in one relation."""
        return self.relations[relation].degrees()

    def neighbors(self, node: int, relation: int = 0) -> np.ndarray:
        """Sorted neighbor ids of ``node`` in one relation."""
        return self.relations[relation].neighbors(node)

    def num_edges(self) -> int:
        """Edge count as a user would state it: undirected edges (and self-loops) once."""
        if self.directed:
            return self.num_entries
        loops = 0
        for relation in self.relations:
            rows = np.repeat(np.arange(self.num_nodes, dtype=np.int64), relation.degrees())
            loops += int(np.count_nonzero(rows == relation.indices))
        return (self.num_entries + loops) // 2

    def edge_list(self) -> np.ndarray:
        """Every stored entry as ``(src, dst, rel)`` rows.

        Feeding the result back to :func:`build_csr` with the same node count,
        relation count and directedness rebuilds an identical graph.
        """
        blocks = []
        for rel_id, relation in enumerate(self.relations):
            dst = np.repeat(np.arange(self.num_nodes, dtype=np.int64), relation.degrees())
            block = np.empty((len(dst), 3), dtype=np.int64)
            block[:, 0] = relation.indices
            block[:, 1] = dst
            block[:, 2] = rel_id
            blocks.append(block)
        return np.concatenate(blocks) if blocks else np.empty((0, 3), dtype=np.int64)

    def check_symmetric(self) -> bool:
        """Return True when every relation is symmetric."""
        for relation in self.relations:
            keys = relation.keys(self.num_nodes)
            rows, cols = np.divmod(keys, max(self.num_nodes, 1))
            if not np.array_equal(np.sort(cols * self.num_nodes + rows), keys):
                return False
        return True

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Relation-merged adjacency as a float64 scipy CSR matrix (ones on entries)."""
        merged = merged_view(self).relations[0]
        index_dtype = np.int32 if max(self.num_nodes, merged.num_entries) < 2**31 - 1 else np.int64
        data = np.ones(merged.num_entries, dtype=np.float64)
        return sp.csr_matrix(
            (data, merged.indices.astype(index_dtype), merged.indptr.astype(index_dtype)),
            shape=(self.num_nodes, self.num_nodes),
            copy=False,
        )


def _as_edge_array(edges: EdgeInput) -> np.ndarray:
    array = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
    if array.size == 0:
        return np.empty((0, 3), dtype=np.int64)
    if array.ndim != 2 or array.shape[1] not in (2, 3):
        raise ValidationError("edges must be (src, dst) or (src, dst, rel) rows")
    if array.shape[1] == 2:
        array = np.column_stack([array, np.zeros(len(array), dtype=np.int64)])
    return array


def build_csr(
    edges: EdgeInput,
    num_nodes: int,
    num_relations: int = 1,
    directed: bool = False,
) -> Graph:
    """Build a graph from an edge list.

    Duplicate edges collapse to one, self-loops are kept, and undirected edges
    are stored in both directions. For directed graphs row ``i`` holds the
    sources of edges into ``i``.

    Args:
        edges: ``(src, dst, rel)`` rows; ``(src, dst)`` rows imply relation 0
        num_nodes: Number of nodes N
        num_relations: Number of relations
        directed: Keep edge direction instead of symmetrizing

    Returns:
        The validated graph

    Raises:
        ValidationError: Endpoint or relation out of range; ``index`` names the
            offending edge
    """
    if num_relations < 1:
        raise ValidationError("num_relations must be at least 1")
    array = _as_edge_array(edges)
    src, dst, rel = array[:, 0], array[:, 1], array[:, 2]

    bad_endpoint = (src < 0) | (src >= num_nodes) | (dst < 0) | (dst >= num_nodes)
    if bad_endpoint.any():
        index = int(np.argmax(bad_endpoint))
        raise ValidationError(
            f"endpoint out of range at edge {index}: ({src[index]}, {dst[index]}) with N={num_nodes}",
            index=index,
        )
    bad_relation = (rel < 0) | (rel >= num_relations)
    if bad_relation.any():
        index = int(np.argmax(bad_relation))
        raise ValidationError(
            f"relation out of range at edge {index}: {rel[index]} with {num_relations} relations",
            index=index,
        )

    relations = []
    for rel_id in range(num_relations):
        mask = rel == rel_id
        rows, cols = dst[mask], src[mask]
        if not directed:
            rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
        keys = np.unique(rows * num_nodes + cols)
        relations.append(_relation_from_keys(keys, num_nodes))

    graph = Graph(num_nodes=num_nodes, relations=tuple(relations), directed=directed)
    logger.debug(
        "Built graph: %d nodes, %d relations, %d stored entries from %d input edges",
        num_nodes,
        num_relations,
        graph.num_entries,
        len(array),
    )
    return graph


def merged_view(graph: Graph) -> Graph:
    """Collapse all relations into one, deduplicating the union of edge sets.

    Args:
        graph: A valid graph

    Returns:
        The same graph when it has a single relation, otherwise a new
        single-relation graph with the same directedness
    """
    if graph.num_relations == 1:
        return graph
    keys = np.unique(np.concatenate([relation.keys(graph.num_nodes) for relation in graph.relations]))
    return Graph(
        num_nodes=graph.num_nodes,
        relations=(_relation_from_keys(keys, graph.num_nodes),),
        directed=graph.directed,
    )
