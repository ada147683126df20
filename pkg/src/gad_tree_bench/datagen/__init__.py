"""Synthetic dataset generation."""

from gad_tree_bench.datagen.generator import GenSpec, Mechanism, generate

__all__ = ["GenSpec", "Mechanism", "generate"]
