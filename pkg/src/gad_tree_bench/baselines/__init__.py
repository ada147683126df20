"""Non-tree baselines: KNN scoring and neighborhood averaging."""

from gad_tree_bench.baselines.knn import KnnParams, knn_scores, nearest_neighbors
from gad_tree_bench.baselines.neighborhood import NaParams, neighborhood_average

__all__ = ["KnnParams", "NaParams", "knn_scores", "nearest_neighbors", "neighborhood_average"]
