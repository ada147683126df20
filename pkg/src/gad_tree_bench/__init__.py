"""Graph anomaly detection with tree ensembles over aggregated neighbor features."""

__version__ = "0.1.0"
