"""CART trees grown by greedy split search.

One builder serves both learners. In classification mode a split maximises
the weighted gini or entropy decrease and a leaf holds the weighted positive
fraction. In boosting mode a split maximises the second-order gain

    1/2 * [G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda) - G^2 / (H + lambda)]

and a leaf holds ``-G / (H + lambda)``. Samples go left iff
``x[feature] <= threshold``; thresholds are midpoints between consecutive
distinct values, and gain ties go to the lower feature index, then the lower
threshold.
"""

import logging
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple

import numpy as np

from gad_tree_bench.errors import DivergenceError, ValidationError

logger = logging.getLogger(__name__)

LEAF = -1
HIST_BINS = 256


class Criterion(StrEnum):
    """Impurity used by classification trees."""

    GINI = "gini"
    ENTROPY = "entropy"


class SplitMode(StrEnum):
    """Exact search over every distinct value, or 256 quantile bins."""

    EXACT = "exact"
    HIST = "hist"


class TreeNode(NamedTuple):
    """Read-only view of one node; ``feature_index == -1`` marks a leaf."""

    feature_index: int
    threshold: float
    left: int
    right: int
    value: float

    @property
    def is_leaf(self) -> bool:
        """True for leaves."""
        return self.feature_index == LEAF


@dataclass(frozen=True, eq=False)
class Tree:
    """A fitted tree stored as flat node arrays; node 0 is the root."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def node_count(self) -> int:
        """Number of nodes."""
        return len(self.feature)

    def node(self, index: int) -> TreeNode:
        """View of node ``index``."""
        return TreeNode(
            int(self.feature[index]),
            float(self.threshold[index]),
            int(self.left[index]),
            int(self.right[index]),
            float(self.value[index]),
        )

    def depth(self) -> int:
        """Length of the longest root-to-leaf path."""
        depths = np.zeros(self.node_count, dtype=np.int64)
        for index in range(self.node_count):
            if self.feature[index] != LEAF:
                depths[self.left[index]] = depths[self.right[index]] = depths[index] + 1
        return int(depths.max()) if self.node_count else 0

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while len(active):
            current = node[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf value for every row of ``X``."""
        return self.value[self.apply(X)]


@dataclass(frozen=True)
class ClassTargets:
    """Binary labels with optional non-negative sample weights."""

    y: np.ndarray
    weight: np.ndarray | None = None


@dataclass(frozen=True)
class GradientTargets:
    """Per-sample first and second derivatives of the loss."""

    grad: np.ndarray
    hess: np.ndarray


@dataclass(frozen=True)
class TreeSettings:
    """Growth limits shared by both modes."""

    max_depth: int | None = None
    min_samples_leaf: int = 1
    max_features: int | None = None
    criterion: Criterion = Criterion.GINI
    l2_lambda: float = 1.0
    min_child_weight: float = 0.0
    split_mode: SplitMode = SplitMode.EXACT


class _Split(NamedTuple):
    feature: int
    threshold: float
    gain: float
    go_left: np.ndarray


def _impurity(positive: np.ndarray, total: np.ndarray, criterion: Criterion) -> np.ndarray:
    """Weight-scaled impurity ``W * imp(P / W)``; zero where ``W == 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, positive / total, 0.0)
        if criterion is Criterion.GINI:
            return 2.0 * total * p * (1.0 - p)
        q = 1.0 - p
        entropy = -(
            np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
            + np.where(q > 0, q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
        )
        return total * entropy


def _newton_score(grad: np.ndarray, hess: np.ndarray, l2_lambda: float) -> np.ndarray:
    grad = np.asarray(grad, dtype=np.float64)
    denominator = np.asarray(hess, dtype=np.float64) + l2_lambda
    out = np.zeros(np.broadcast_shapes(grad.shape, denominator.shape))
    return np.divide(grad * grad, denominator, out=out, where=denominator > 0)


def _midpoint(low: float, high: float) -> float:
    mid = low / 2.0 + high / 2.0
    return mid if low <= mid < high else low


class _Builder:
    """Grows one tree over the rows of ``X`` it is given."""

    def __init__(
        self,
        X: np.ndarray,
        targets: ClassTargets | GradientTargets,
        settings: TreeSettings,
        rng: np.random.Generator,
        rows: np.ndarray,
    ):
        self.X = X
        self.settings = settings
        self.rng = rng
        self.boosting = isinstance(targets, GradientTargets)
        n = X.shape[0]
        if self.boosting:
            self.first = np.asarray(targets.grad, dtype=np.float64)
            self.second = np.asarray(targets.hess, dtype=np.float64)
        else:
            y = np.asarray(targets.y, dtype=np.float64)
            weight = np.ones(n) if targets.weight is None else np.asarray(targets.weight, dtype=np.float64)
            # first = positive weight, second = total weight
            self.first = weight * y
            self.second = weight
        dim = X.shape[1]
        max_features = settings.max_features or dim
        self.max_features = min(max(1, max_features), dim)
        self.bin_codes: np.ndarray | None = None
        self.bin_edges: list[np.ndarray] = []
        if settings.split_mode is SplitMode.HIST:
            self._build_bins(rows)

        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _build_bins(self, rows: np.ndarray) -> None:
        quantiles = np.linspace(0.0, 1.0, HIST_BINS + 1)[1:-1]
        codes = np.empty((self.X.shape[0], self.X.shape[1]), dtype=np.int64)
        for column in range(self.X.shape[1]):
            values = self.X[rows, column]
            edges = np.unique(np.quantile(values, quantiles, method="lower"))
            self.bin_edges.append(edges)
            codes[:, column] = np.searchsorted(edges, self.X[:, column], side="left")
        self.bin_codes = codes

    def _new_node(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _leaf_value(self, first_sum: float, second_sum: float) -> float:
        if self.boosting:
            denominator = second_sum + self.settings.l2_lambda
            return -first_sum / denominator if denominator > 0 else 0.0
        return first_sum / second_sum if second_sum > 0 else 0.0

    def _sample_features(self) -> np.ndarray:
        dim = self.X.shape[1]
        if self.max_features >= dim:
            return np.arange(dim)
        return np.sort(self.rng.choice(dim, size=self.max_features, replace=False))

    def _gains(
        self, first_left: np.ndarray, second_left: np.ndarray, first_total: float, second_total: float
    ) -> np.ndarray:
        first_right = first_total - first_left
        second_right = second_total - second_left
        if self.boosting:
            lam = self.settings.l2_lambda
            parent = _newton_score(np.float64(first_total), np.float64(second_total), lam)
            return 0.5 * (
                _newton_score(first_left, second_left, lam) + _newton_score(first_right, second_right, lam) - parent
            )
        criterion = self.settings.criterion
        parent = _impurity(np.float64(first_total), np.float64(second_total), criterion)
        return parent - _impurity(first_left, second_left, criterion) - _impurity(
            first_right, second_right, criterion
        )

    def _admissible(self, count_left: np.ndarray, n: int, second_left: np.ndarray, second_total: float) -> np.ndarray:
        msl = self.settings.min_samples_leaf
        ok = (count_left >= msl) & (n - count_left >= msl)
        if self.boosting and self.settings.min_child_weight > 0:
            mcw = self.settings.min_child_weight
            ok = ok & (second_left >= mcw) & (second_total - second_left >= mcw)
        return ok

    def _best_exact(self, idx: np.ndarray, features: np.ndarray, first_total: float, second_total: float) -> _Split | None:
        n = len(idx)
        block = self.X[np.ix_(idx, features)]
        order = np.argsort(block, axis=0, kind="stable")
        sorted_values = np.take_along_axis(block, order, axis=0)
        first_left = np.cumsum(self.first[idx][order], axis=0)[:-1]
        second_left = np.cumsum(self.second[idx][order], axis=0)[:-1]
        count_left = np.arange(1, n)[:, None]

        gains = self._gains(first_left, second_left, first_total, second_total)
        valid = (sorted_values[:-1] < sorted_values[1:]) & self._admissible(
            count_left, n, second_left, second_total
        )
        gains = np.where(valid, gains, -np.inf)
        # Feature-major flattening: argmax returns the lowest feature, then the
        # lowest threshold, among equal gains.
        flat = int(np.argmax(gains.T))
        column, position = divmod(flat, n - 1)
        best_gain = float(gains[position, column])
        if not np.isfinite(best_gain):
            return None
        feature = int(features[column])
        threshold = _midpoint(float(sorted_values[position, column]), float(sorted_values[position + 1, column]))
        return _Split(feature, threshold, best_gain, self.X[idx, feature] <= threshold)

    def _best_hist(self, idx: np.ndarray, features: np.ndarray, first_total: float, second_total: float) -> _Split | None:
        n = len(idx)
        num_bins = HIST_BINS
        codes = self.bin_codes[np.ix_(idx, features)] + np.arange(len(features)) * num_bins
        size = len(features) * num_bins
        first = np.bincount(codes.ravel(), weights=np.repeat(self.first[idx], len(features)), minlength=size)
        second = np.bincount(codes.ravel(), weights=np.repeat(self.second[idx], len(features)), minlength=size)
        counts = np.bincount(codes.ravel(), minlength=size)
        shape = (len(features), num_bins)
        first_left = np.cumsum(first.reshape(shape), axis=1)[:, :-1]
        second_left = np.cumsum(second.reshape(shape), axis=1)[:, :-1]
        count_left = np.cumsum(counts.reshape(shape), axis=1)[:, :-1]

        gains = self._gains(first_left, second_left, first_total, second_total)
        edge_counts = np.array([len(self.bin_edges[f]) for f in features])[:, None]
        valid = (
            (np.arange(num_bins - 1)[None, :] < edge_counts)
            & (count_left > 0)
            & (count_left < n)
            & self._admissible(count_left, n, second_left, second_total)
        )
        gains = np.where(valid, gains, -np.inf)
        flat = int(np.argmax(gains))
        column, bin_index = divmod(flat, num_bins - 1)
        best_gain = float(gains[column, bin_index])
        if not np.isfinite(best_gain):
            return None
        feature = int(features[column])
        threshold = float(self.bin_edges[feature][bin_index])
        return _Split(feature, threshold, best_gain, self.X[idx, feature] <= threshold)

    def _is_pure(self, idx: np.ndarray) -> bool:
        if self.boosting:
            return False
        positive = self.first[idx]
        return bool(np.all(positive == 0) or np.all(positive == self.second[idx]))

    def grow(self, rows: np.ndarray) -> Tree:
        settings = self.settings
        root = self._new_node()
        stack = [(root, rows, 0)]
        while stack:
            node, idx, depth = stack.pop()
            first_total = float(self.first[idx].sum())
            second_total = float(self.second[idx].sum())
            self.value[node] = self._leaf_value(first_total, second_total)

            if (
                (settings.max_depth is not None and depth >= settings.max_depth)
                or len(idx) < 2 * settings.min_samples_leaf
                or self._is_pure(idx)
            ):
                continue
            features = self._sample_features()
            if settings.split_mode is SplitMode.HIST:
                split = self._best_hist(idx, features, first_total, second_total)
            else:
                split = self._best_exact(idx, features, first_total, second_total)
            if split is None or (self.boosting and split.gain <= 0):
                continue

            left, right = self._new_node(), self._new_node()
            self.feature[node] = split.feature
            self.threshold[node] = split.threshold
            self.left[node] = left
            self.right[node] = right
            stack.append((right, idx[~split.go_left], depth + 1))
            stack.append((left, idx[split.go_left], depth + 1))

        return Tree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.array(self.value, dtype=np.float64),
        )


def fit_tree(
    X: np.ndarray,
    targets: ClassTargets | GradientTargets,
    settings: TreeSettings,
    rng: np.random.Generator,
    rows: np.ndarray | None = None,
) -> Tree:
    """Grow one tree.

    Args:
        X: n x d finite feature rows
        targets: Class labels (classification mode) or gradient/hessian pairs
            (boosting mode)
        settings: Depth, leaf size, feature sampling and split mode
        rng: Source for per-node feature sampling
        rows: Subset of row indices to fit on (all rows when omitted)

    Returns:
        The fitted tree

    Raises:
        ValidationError: Empty input or mismatched lengths
        DivergenceError: Non-finite gradient or hessian
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("empty input: need at least one sample")
    rows = np.arange(X.shape[0]) if rows is None else np.asarray(rows, dtype=np.int64)
    if len(rows) == 0:
        raise ValidationError("empty input: need at least one sample")
    if isinstance(targets, GradientTargets):
        if len(targets.grad) != X.shape[0] or len(targets.hess) != X.shape[0]:
            raise ValidationError("gradient/hessian length does not match the sample count")
        if not (np.isfinite(targets.grad).all() and np.isfinite(targets.hess).all()):
            raise DivergenceError("non-finite gradient or hessian")
    elif len(targets.y) != X.shape[0]:
        raise ValidationError("label length does not match the sample count")
    return _Builder(X, targets, settings, rng, rows).grow(rows)
