"""Random hyperparameter search with validation-AUPRC selection."""

import logging

import numpy as np

from gad_tree_bench.errors import GadError, TrialError, ValidationError
from gad_tree_bench.graph.dataset import Dataset
from gad_tree_bench.protocol.families import Family, parse_family
from gad_tree_bench.protocol.search_space import sample_config
from gad_tree_bench.protocol.seeding import derive_seed
from gad_tree_bench.protocol.splits import FULL_RATIOS, Setting, make_split
from gad_tree_bench.protocol.trials import FeatureCache, evaluate_split, model_seed
from gad_tree_bench.schemas import TrialRecord, TuneReport

logger = logging.getLogger(__name__)

# Trial t draws its configuration from derive_seed(master_seed, CONFIG_STREAM_OFFSET + t).
CONFIG_STREAM_OFFSET = 1000


def trial_config(family: Family, master_seed: int, trial: int) -> dict:
    """Overrides evaluated by ``trial``: the defaults for trial 0, a random draw otherwise."""
    if trial == 0:
        return {}
    rng = np.random.default_rng(derive_seed(master_seed, CONFIG_STREAM_OFFSET + trial))
    return sample_config(family.search_space(), rng)


def random_search(
    family: Family | str,
    dataset: Dataset,
    setting: Setting | str = Setting.FULL,
    n_trials: int = 20,
    master_seed: int = 0,
    workers: int = 1,
    split_name: str | None = None,
    ratios: tuple[float, float, float] = FULL_RATIOS,
    cache: FeatureCache | None = None,
) -> TuneReport:
    """Evaluate ``n_trials`` configurations on one fixed split.

    The split uses ``derive_seed(master_seed, 0)`` and every trial trains
    with the same model seed, so rerunning the winner through
    :func:`~gad_tree_bench.protocol.trials.run_trials` with one repeat and the
    same master seed reproduces its test metrics. The winner maximises
    validation AUPRC; ties go to the lower trial index.

    Raises:
        ValidationError: ``n_trials`` below 1
        TrialError: A trial failed; ``details["trial"]`` names it
    """
    if n_trials < 1:
        raise ValidationError(f"n_trials must be at least 1, got {n_trials}")
    family = parse_family(family) if isinstance(family, str) else family
    setting = Setting(setting)
    cache = cache or FeatureCache(dataset, workers)
    split_seed = derive_seed(master_seed, 0)
    split = make_split(dataset, setting, split_seed, ratios, split_name)
    seed = model_seed(split_seed)

    trials = []
    for trial in range(n_trials):
        overrides = trial_config(family, master_seed, trial)
        try:
            resolved = family.resolve(overrides)
            val, test, _ = evaluate_split(dataset, resolved, split, seed, cache, workers)
        except GadError as exc:
            raise TrialError(f"trial {trial} failed: {exc.message}", cause=exc, trial=trial) from exc
        except Exception as exc:  # pylint: disable=broad-except
            raise TrialError(f"trial {trial} failed: {exc}", cause=exc, trial=trial) from exc
        trials.append(TrialRecord(trial=trial, seed=seed, config=resolved.as_dict(), val=val, test=test))
        logger.info("%s trial %d/%d: val AUPRC %.4f", family.name, trial + 1, n_trials, val.auprc)

    best = max(trials, key=lambda record: (record.val.auprc, -record.trial))
    logger.info(
        "Best trial %d: val AUPRC %.4f, test AUROC %.4f AUPRC %.4f",
        best.trial,
        best.val.auprc,
        best.test.auroc,
        best.test.auprc,
    )
    return TuneReport(
        dataset=dataset.name,
        family=family.name,
        setting=str(setting),
        split_name=split_name,
        n_trials=n_trials,
        master_seed=master_seed,
        split_seed=split_seed,
        best_trial=best.trial,
        best_config=best.config,
        best_val=best.val,
        best_test=best.test,
        trials=trials,
    )
