"""Hyperparameters of the tree learners."""

import math

from pydantic import BaseModel, ConfigDict, Field

from gad_tree_bench.ensemble.tree import Criterion, SplitMode, TreeSettings


class ForestParams(BaseModel):
    """Random forest settings; defaults follow the usual bagging defaults."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_estimators: int = Field(default=100, ge=1, description="Number of trees")
    criterion: Criterion = Field(default=Criterion.GINI, description="Split impurity")
    max_samples: float = Field(default=1.0, gt=0, le=1, description="Bootstrap draws per tree as a fraction of n")
    max_features: int | None = Field(
        default=None, ge=1, description="Columns sampled per node; None means ceil(sqrt(dim))"
    )
    min_samples_leaf: int = Field(default=1, ge=1, description="Minimum samples in each child")
    max_depth: int | None = Field(default=None, ge=0, description="Depth limit; None grows until pure")
    pos_weight: float = Field(default=1.0, gt=0, description="Sample weight of positive rows")
    bootstrap: bool = Field(default=True, description="Draw rows with replacement; off fits every tree on all rows")
    split_mode: SplitMode = Field(default=SplitMode.EXACT, description="exact or 256-bin hist split search")

    def tree_settings(self, dim: int) -> TreeSettings:
        """Per-tree growth settings for inputs with ``dim`` columns."""
        return TreeSettings(
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features or math.ceil(math.sqrt(dim)),
            criterion=self.criterion,
            split_mode=self.split_mode,
        )


class BoostParams(BaseModel):
    """Second-order gradient boosting settings with logistic loss."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_estimators: int = Field(default=100, ge=0, description="Boosting rounds")
    learning_rate: float = Field(default=0.3, ge=0, description="Shrinkage eta applied to every tree")
    l2_lambda: float = Field(default=1.0, ge=0, description="L2 penalty lambda on leaf values")
    subsample: float = Field(default=1.0, gt=0, le=1, description="Row fraction drawn without replacement per round")
    max_depth: int = Field(default=6, ge=0, description="Depth limit of each tree")
    base_logit: float = Field(default=0.0, description="Initial logit of every sample")
    min_child_weight: float = Field(default=1.0, ge=0, description="Minimum hessian sum in each child")
    min_samples_leaf: int = Field(default=1, ge=1, description="Minimum samples in each child")
    max_features: int | None = Field(default=None, ge=1, description="Columns sampled per node; None means all")
    pos_weight: float = Field(default=1.0, gt=0, description="Weight on positive rows' gradients and hessians")
    split_mode: SplitMode = Field(default=SplitMode.EXACT, description="exact or 256-bin hist split search")

    def tree_settings(self) -> TreeSettings:
        """Per-round growth settings."""
        return TreeSettings(
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features,
            l2_lambda=self.l2_lambda,
            min_child_weight=self.min_child_weight,
            split_mode=self.split_mode,
        )
