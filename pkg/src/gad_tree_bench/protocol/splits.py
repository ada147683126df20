"""Train/validation/test splits of the labeled nodes."""

import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from gad_tree_bench.errors import DegenerateLabelsError, InsufficientLabelsError, ValidationError
from gad_tree_bench.graph.dataset import ANOMALOUS, NORMAL, SPLIT_PARTS, UNKNOWN, Dataset, LabelTable

logger = logging.getLogger(__name__)

FULL_RATIOS = (0.4, 0.2, 0.4)
SEMI_POSITIVES = 20
SEMI_NEGATIVES = 80
MAX_SPLIT_ATTEMPTS = 100


class Setting(StrEnum):
    """Label budget of an experiment."""

    FULL = "full"
    SEMI = "semi"


@dataclass(frozen=True, eq=False)
class SplitSpec:
    """Disjoint sorted node-id sets drawn from one seed."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    setting: Setting
    seed: int
    name: str | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SplitSpec):
            return NotImplemented
        return (
            self.setting == other.setting
            and self.seed == other.seed
            and self.name == other.name
            and all(np.array_equal(getattr(self, part), getattr(other, part)) for part in SPLIT_PARTS)
        )

    __hash__ = None  # type: ignore[assignment]

    def part(self, name: str) -> np.ndarray:
        """Node ids of ``train``, ``val`` or ``test``."""
        if name not in SPLIT_PARTS:
            raise ValidationError(f"unknown split part {name!r}")
        return getattr(self, name)


def _has_both_classes(labels: np.ndarray, ids: np.ndarray) -> bool:
    values = labels[ids]
    return bool((values == ANOMALOUS).any() and (values == NORMAL).any())


def full_split(
    labels: LabelTable,
    ratios: tuple[float, float, float] = FULL_RATIOS,
    seed: int = 0,
) -> SplitSpec:
    """Uniformly partition the labeled nodes by a seeded shuffle.

    Part sizes are ``floor(ratio * n)`` for train and validation, with the
    remainder in test. A draw leaving any part without both classes is
    redrawn, up to 100 attempts: validation and test need both classes too,
    since AUROC is undefined on a single-class set.

    Args:
        labels: Node labels; unknown nodes are never assigned
        ratios: Positive (train, val, test) fractions summing to 1
        seed: 64-bit split seed

    Returns:
        The split

    Raises:
        ValidationError: Invalid ratios
        DegenerateLabelsError: No draw put both classes in each of train,
            validation and test (stricter than requiring them in train alone)
    """
    if len(ratios) != 3 or any(ratio <= 0 for ratio in ratios) or not math.isclose(sum(ratios), 1.0):
        raise ValidationError(f"ratios must be three positive fractions summing to 1, got {ratios}")
    known = labels.known_ids()
    n = len(known)
    n_train = math.floor(ratios[0] * n + 1e-9)
    n_val = math.floor(ratios[1] * n + 1e-9)
    rng = np.random.default_rng(seed)

    for attempt in range(MAX_SPLIT_ATTEMPTS):
        order = rng.permutation(known)
        train = np.sort(order[:n_train])
        val = np.sort(order[n_train : n_train + n_val])
        test = np.sort(order[n_train + n_val :])
        if all(_has_both_classes(labels.labels, ids) for ids in (train, val, test)):
            if attempt:
                logger.debug("Split seed %d needed %d redraws", seed, attempt)
            return SplitSpec(train=train, val=val, test=test, setting=Setting.FULL, seed=seed)
    raise DegenerateLabelsError(
        f"no split with both classes in train, val and test after {MAX_SPLIT_ATTEMPTS} attempts"
    )


def semi_split(
    labels: LabelTable,
    n_pos: int = SEMI_POSITIVES,
    n_neg: int = SEMI_NEGATIVES,
    seed: int = 0,
) -> SplitSpec:
    """Draw a fixed-budget training set plus a same-composition validation set.

    Train holds ``n_pos`` random anomalies and ``n_neg`` random normal nodes;
    validation is a disjoint draw of the same composition; test is every
    other labeled node.

    Raises:
        InsufficientLabelsError: Fewer than ``2 * n_pos`` positives or
            ``2 * n_neg`` negatives
    """
    positives = labels.positive_ids()
    negatives = labels.negative_ids()
    if len(positives) < 2 * n_pos:
        raise InsufficientLabelsError(
            f"insufficient positives for semi split: need {2 * n_pos}, have {len(positives)}"
        )
    if len(negatives) < 2 * n_neg:
        raise InsufficientLabelsError(
            f"insufficient negatives for semi split: need {2 * n_neg}, have {len(negatives)}"
        )
    rng = np.random.default_rng(seed)
    positives = rng.permutation(positives)
    negatives = rng.permutation(negatives)
    train = np.sort(np.concatenate([positives[:n_pos], negatives[:n_neg]]))
    val = np.sort(np.concatenate([positives[n_pos : 2 * n_pos], negatives[n_neg : 2 * n_neg]]))
    test = np.sort(np.concatenate([positives[2 * n_pos :], negatives[2 * n_neg :]]))
    return SplitSpec(train=train, val=val, test=test, setting=Setting.SEMI, seed=seed)


def named_split(dataset: Dataset, name: str, setting: Setting = Setting.FULL, seed: int = 0) -> SplitSpec:
    """Use the pre-existing split ``name`` shipped with the dataset.

    Raises:
        ValidationError: Unknown name, overlapping parts or unlabeled nodes
        DegenerateLabelsError: Train lacks a class
    """
    if name not in dataset.splits:
        available = ", ".join(sorted(dataset.splits)) or "none"
        raise ValidationError(f"unknown split {name!r} (available: {available})")
    parts = {part: np.unique(np.asarray(dataset.splits[name][part], dtype=np.int64)) for part in SPLIT_PARTS}
    labels = dataset.labels.labels
    for part, ids in parts.items():
        if (labels[ids] == UNKNOWN).any():
            raise ValidationError(f"split {name!r} part {part!r} contains unlabeled nodes")
    if (
        np.intersect1d(parts["train"], parts["val"]).size
        or np.intersect1d(parts["train"], parts["test"]).size
        or np.intersect1d(parts["val"], parts["test"]).size
    ):
        raise ValidationError(f"split {name!r} parts overlap")
    if not _has_both_classes(labels, parts["train"]):
        raise DegenerateLabelsError(f"split {name!r} train part lacks a class")
    return SplitSpec(setting=setting, seed=seed, name=name, **parts)


def make_split(
    dataset: Dataset,
    setting: Setting | str,
    seed: int,
    ratios: tuple[float, float, float] = FULL_RATIOS,
    split_name: str | None = None,
) -> SplitSpec:
    """Split for one repeat: the named split when given, else a fresh draw."""
    setting = Setting(setting)
    if split_name is not None:
        return named_split(dataset, split_name, setting, seed)
    if setting is Setting.SEMI:
        return semi_split(dataset.labels, seed=seed)
    return full_split(dataset.labels, ratios, seed)
