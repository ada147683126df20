"""Graph-core: sparse graphs, datasets and the on-disk format."""

from gad_tree_bench.graph.csr import CsrRelation, Graph, build_csr, merged_view
from gad_tree_bench.graph.dataset import ANOMALOUS, NORMAL, UNKNOWN, Dataset, FeatureMatrix, LabelTable
from gad_tree_bench.graph.io import convert_text_files, load_dataset, save_dataset

__all__ = [
    "ANOMALOUS",
    "NORMAL",
    "UNKNOWN",
    "CsrRelation",
    "Dataset",
    "FeatureMatrix",
    "Graph",
    "LabelTable",
    "build_csr",
    "convert_text_files",
    "load_dataset",
    "merged_view",
    "save_dataset",
]
