"""Tests for family parsing, configuration and search spaces."""

import numpy as np
import pytest

from gad_tree_bench.baselines import KnnParams, NaParams
from gad_tree_bench.ensemble import BoostParams, EnsembleModel, ForestParams
from gad_tree_bench.errors import UnknownFamilyError, ValidationError
from gad_tree_bench.features import AggKind
from gad_tree_bench.protocol.families import GraphParams, Learner, fit_and_score, parse_family
from gad_tree_bench.protocol.search_space import (
    BOOST_SPACE,
    Choice,
    LogUniform,
    RandInt,
    Uniform,
    sample_config,
)


@pytest.mark.parametrize(
    ("name", "learner", "graph", "na"),
    [
        ("rf", Learner.RF, False, False),
        ("xgb", Learner.XGB, False, False),
        ("knn", Learner.KNN, False, False),
        ("rf-graph", Learner.RF, True, False),
        ("XGB-Graph", Learner.XGB, True, False),
        ("xgb-graph+na", Learner.XGB, True, True),
        ("knn+na", Learner.KNN, False, True),
    ],
)
def test_parse_family(name, learner, graph, na):
    """Family names decompose into learner, graph and NA flags."""
    family = parse_family(name)

    assert (family.learner, family.graph, family.na) == (learner, graph, na)
    assert family.name == name.lower()


@pytest.mark.parametrize("name", ["gcn", "knn-graph", "rf+graph", "", "xgb-graph+na+na"])
def test_unknown_family(name):
    """Anything else is an unknown family."""
    with pytest.raises(UnknownFamilyError, match="unknown family"):
        parse_family(name)


def test_resolve_defaults():
    """With no overrides every stage takes its defaults."""
    config = parse_family("xgb-graph+na").resolve()

    assert config.learner == BoostParams()
    assert config.graph == GraphParams(layers=2, agg=AggKind.MEAN)
    assert config.na == NaParams()


def test_resolve_routes_keys_to_stages():
    """Overrides land in the stage that owns the key, aliases included."""
    config = parse_family("rf-graph").resolve({"n_estimators": 7, "L": 3, "kind": "max"})

    assert isinstance(config.learner, ForestParams)
    assert config.learner.n_estimators == 7
    assert config.graph.layers == 3
    assert config.graph.agg is AggKind.MAX
    assert config.na is None


def test_boost_aliases():
    """eta and lambda map to the boosting parameters."""
    config = parse_family("xgb").resolve({"eta": 0.1, "lambda": 10.0})

    assert config.learner.learning_rate == 0.1
    assert config.learner.l2_lambda == 10.0


def test_resolve_rejects_unknown_key():
    """Keys no stage owns are reported."""
    with pytest.raises(ValidationError, match="unknown hyperparameter"):
        parse_family("rf").resolve({"layers": 2})


def test_resolve_rejects_invalid_value():
    """Out-of-range values name the field."""
    with pytest.raises(ValidationError, match="'layers'"):
        parse_family("xgb-graph").resolve({"layers": -1})


def test_as_dict_is_flat_and_json_ready():
    """The snapshot merges learner, graph and NA keys."""
    snapshot = parse_family("rf-graph+na").resolve({"agg": "sum"}).as_dict()

    assert snapshot["agg"] == "sum"
    assert snapshot["layers"] == 2
    assert snapshot["num_neighbors"] == 5
    assert snapshot["criterion"] == "gini"


def test_search_space_composition():
    """Graph and NA families extend the learner's space."""
    assert set(parse_family("xgb").search_space()) == set(BOOST_SPACE)
    assert set(parse_family("xgb-graph+na").search_space()) == {*BOOST_SPACE, "layers", "agg", "num_neighbors"}
    assert set(parse_family("knn").search_space()) == {"k"}


def test_sampled_configs_resolve():
    """Every draw from a family's space is a valid configuration."""
    rng = np.random.default_rng(0)
    for name in ("rf-graph+na", "xgb-graph", "knn+na"):
        family = parse_family(name)
        for _ in range(50):
            family.resolve(sample_config(family.search_space(), rng))


def test_boost_learning_rate_range():
    """The scaled log-uniform learning rate stays in (0.05, 0.5]."""
    rng = np.random.default_rng(1)
    draws = [BOOST_SPACE["learning_rate"].sample(rng) for _ in range(5000)]

    assert min(draws) > 0.05
    assert max(draws) <= 0.5


def test_distribution_ranges():
    """Each distribution keeps to its support."""
    rng = np.random.default_rng(2)

    uniform = [Uniform(0.1, 1.0).sample(rng) for _ in range(2000)]
    ints = {RandInt(1, 3).sample(rng) for _ in range(500)}
    picks = {Choice(("a", "b")).sample(rng) for _ in range(200)}
    logs = [LogUniform(-2.0, 1.0).sample(rng) for _ in range(2000)]

    assert all(0.1 < value <= 1.0 for value in uniform)
    assert ints == {1, 2, 3}
    assert picks == {"a", "b"}
    assert all(0.01 < value <= 10.0 for value in logs)


def test_sample_config_is_seeded():
    """Equal generator seeds give equal configurations."""
    space = parse_family("xgb-graph+na").search_space()

    first = sample_config(space, np.random.default_rng(9))
    second = sample_config(space, np.random.default_rng(9))

    assert first == second
    assert list(first) == list(space)


def _toy_problem():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((60, 3))
    y = (X[:, 0] > 0.5).astype(np.int8)
    return X, y


def test_fit_and_score_tree_learners_return_models():
    """Forest and boosting fits return one score vector per query and the model."""
    X, y = _toy_problem()
    for name in ("rf", "xgb"):
        config = parse_family(name).resolve({"n_estimators": 5})

        fitted = fit_and_score(config, X, y, [X[:10], X[10:25]], seed=3)

        assert isinstance(fitted.model, EnsembleModel)
        assert [len(scores) for scores in fitted.scores] == [10, 15]


def test_fit_and_score_knn_caps_k():
    """k larger than the training set is clamped instead of failing."""
    X, y = _toy_problem()
    config = parse_family("knn").resolve({"k": 50})
    assert isinstance(config.learner, KnnParams)

    fitted = fit_and_score(config, X[:20], y[:20], [X[20:]], seed=0)

    assert fitted.model is None
    expected = np.full(40, y[:20].mean())
    np.testing.assert_allclose(fitted.scores[0], expected)
