"""Pydantic documents for metrics and benchmark reports."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = 1

# Metrics summarised in BenchReport.aggregate, in report order.
AGGREGATED_METRICS = ("auroc", "auprc", "rec_at_k")


class MetricReport(BaseModel):
    """Ranking metrics of one scored node set.

    Anomalies are the positive class and ``k`` defaults to the number of
    positives, which makes ``rec_at_k`` equal to precision at k.
    """

    model_config = ConfigDict(
        frozen=True,
        allow_inf_nan=False,
        json_schema_extra={
            "example": {
                "auroc": 0.98989898989899,
                "auprc": 0.3312285,
                "rec_at_k": 0.0,
                "k": 10,
                "num_pos": 10,
                "num_neg": 990,
                "fit_seconds": 0.0,
                "peak_memory_bytes": 0,
            }
        },
    )

    auroc: float = Field(ge=0, le=1, description="Area under the ROC curve, ties half credit")
    auprc: float = Field(ge=0, le=1, description="Average precision over distinct-score thresholds")
    rec_at_k: float = Field(ge=0, le=1, description="Recall among the k top-scored nodes")
    k: int = Field(ge=1, description="Cut-off used for rec_at_k")
    num_pos: int = Field(ge=0, description="Positives in the scored set")
    num_neg: int = Field(ge=0, description="Negatives in the scored set")
    fit_seconds: float = Field(default=0.0, ge=0, description="Wall-clock fit time; 0 unless recorded")
    peak_memory_bytes: int = Field(default=0, ge=0, description="Peak resident memory; 0 unless recorded")


class MetricSummary(BaseModel):
    """Mean and population standard deviation of one metric over repeats."""

    mean: float
    std: float


class RepeatRecord(BaseModel):
    """Validation and test metrics of one repeat."""

    repeat: int = Field(ge=0, description="Repeat index r")
    seed: int = Field(description="Split seed derived from the master seed and r")
    val: MetricReport
    test: MetricReport


class BenchReport(BaseModel):
    """Result of repeated train/evaluate runs of one configuration."""

    schema_version: int = Field(default=SCHEMA_VERSION, description="Report layout version")
    artifact_version: str = Field(description="Package version that produced the report")
    dataset: str = Field(description="Dataset name")
    family: str = Field(description="Model family, e.g. xgb-graph or rf+na")
    setting: str = Field(description="full or semi")
    split_name: str | None = Field(default=None, description="Pre-existing split used by every repeat")
    n_repeats: int = Field(ge=1)
    master_seed: int = Field(ge=0)
    config: dict[str, Any] = Field(description="Resolved family configuration")
    repeats: list[RepeatRecord]
    aggregate: dict[str, MetricSummary] = Field(description="Test metric mean and std over repeats")
    total_seconds: float = Field(default=0.0, ge=0, description="Wall-clock of the run; 0 unless recorded")


class TrialRecord(BaseModel):
    """One random-search trial."""

    trial: int = Field(ge=0, description="Trial index; trial 0 is the default configuration")
    seed: int = Field(description="Model seed of the trial")
    config: dict[str, Any]
    val: MetricReport
    test: MetricReport


class TuneReport(BaseModel):
    """Random-search outcome: the winner by validation AUPRC and every trial."""

    schema_version: int = Field(default=SCHEMA_VERSION)
    dataset: str
    family: str
    setting: str
    split_name: str | None = None
    n_trials: int = Field(ge=1)
    master_seed: int = Field(ge=0)
    split_seed: int
    best_trial: int = Field(ge=0)
    best_config: dict[str, Any]
    best_val: MetricReport
    best_test: MetricReport
    trials: list[TrialRecord]


class LayerSweepRow(BaseModel):
    """Mean test metrics at one aggregation depth."""

    layers: int = Field(ge=0, description="Aggregation layers L")
    mean_auprc: float
    std_auprc: float
    mean_auroc: float
    mean_rec_at_k: float
