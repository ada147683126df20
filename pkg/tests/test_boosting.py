"""Tests for gradient-boosted trees."""

import numpy as np
import pytest

from gad_tree_bench.datagen import GenSpec, generate
from gad_tree_bench.ensemble import (
    BoostParams,
    EnsembleModel,
    fit_gbt,
    logistic_gradients,
    logistic_loss,
    predict_scores,
)
from gad_tree_bench.ensemble.model import ModelKind
from gad_tree_bench.errors import DegenerateLabelsError
from gad_tree_bench.metrics import auroc, evaluate


@pytest.fixture
def noisy_data():
    """Return a small two-class problem with label noise."""
    rng = np.random.default_rng(7)
    X = rng.standard_normal((300, 4))
    y = ((X[:, 0] - X[:, 2] + 0.7 * rng.standard_normal(300)) > 1.0).astype(int)
    return X, y


def test_gradients_match_finite_differences():
    """Test g and h against central differences of the logistic loss."""
    rng = np.random.default_rng(0)
    z = rng.uniform(-6, 6, size=100)
    y = rng.integers(0, 2, size=100).astype(float)
    grad, hess = logistic_gradients(z, y)

    step = 1e-6
    numeric_grad = (logistic_loss(z + step, y) - logistic_loss(z - step, y)) / (2 * step)
    step = 1e-4
    numeric_hess = (logistic_loss(z + step, y) - 2 * logistic_loss(z, y) + logistic_loss(z - step, y)) / step**2

    np.testing.assert_allclose(grad, numeric_grad, atol=1e-5, rtol=0)
    np.testing.assert_allclose(hess, numeric_hess, atol=1e-5, rtol=0)


def test_first_round_gradients_from_zero_logit():
    """Test g = -0.5 for positives, +0.5 for negatives and h = 0.25 at logit 0."""
    grad, hess = logistic_gradients(np.zeros(2), np.array([1.0, 0.0]))
    np.testing.assert_array_equal(grad, [-0.5, 0.5])
    np.testing.assert_array_equal(hess, [0.25, 0.25])


def test_zero_learning_rate_scores_half(noisy_data):
    """Test eta = 0 leaves every score at sigmoid(0)."""
    X, y = noisy_data
    model = fit_gbt(X, y, BoostParams(learning_rate=0.0, n_estimators=5))
    np.testing.assert_array_equal(predict_scores(model, X), np.full(len(X), 0.5))


def test_zero_trees_scores_half(noisy_data):
    """Test a boosted model without trees scores 0.5."""
    X, y = noisy_data
    model = fit_gbt(X, y, BoostParams(n_estimators=0))
    assert model.trees == ()
    np.testing.assert_array_equal(predict_scores(model, X), np.full(len(X), 0.5))


def test_depth_zero_converges_to_prior(noisy_data):
    """Test depth-0 boosting yields a constant score equal to the training prevalence."""
    X, y = noisy_data
    model = fit_gbt(X, y, BoostParams(max_depth=0, n_estimators=300))
    scores = predict_scores(model, X)
    assert np.ptp(scores) == 0.0
    assert scores[0] == pytest.approx(y.mean(), abs=1e-6)


def test_training_loss_is_non_increasing(noisy_data):
    """Test total logistic loss never rises across rounds without subsampling."""
    X, y = noisy_data
    params = BoostParams(n_estimators=30, subsample=1.0)
    model = fit_gbt(X, y, params, seed=0)
    logit = np.full(len(X), params.base_logit)
    losses = [logistic_loss(logit, y).sum()]
    for tree in model.trees:
        logit = logit + params.learning_rate * tree.predict(X)
        losses.append(logistic_loss(logit, y).sum())
    assert all(later <= earlier + 1e-9 for earlier, later in zip(losses, losses[1:], strict=False))


def test_separable_training_auroc():
    """Test default boosting ranks a feature-only dataset's training nodes almost perfectly."""
    spec = GenSpec(
        num_nodes=2000, avg_degree=5, dim=4, anomaly_ratio=0.05, mechanism="feature-only", noise=0.0, seed=1
    )
    dataset = generate(spec)
    X, y = dataset.features.values, dataset.labels.labels
    model = fit_gbt(X, y, seed=0)
    assert auroc(predict_scores(model, X), y) >= 0.999


def test_subsample_is_seeded(noisy_data):
    """Test row subsampling is reproducible from the seed and varies across seeds."""
    X, y = noisy_data
    params = BoostParams(n_estimators=10, subsample=0.5)
    first = predict_scores(fit_gbt(X, y, params, seed=1), X)
    again = predict_scores(fit_gbt(X, y, params, seed=1), X)
    other = predict_scores(fit_gbt(X, y, params, seed=2), X)
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other)


@pytest.mark.parametrize("scale", [4.0, 0.25])
def test_positive_rescaling_keeps_metrics(noisy_data, scale):
    """Test scaling every column by a positive constant leaves scores unchanged."""
    X, y = noisy_data
    params = BoostParams(n_estimators=15, subsample=0.75)
    base = predict_scores(fit_gbt(X, y, params, seed=5), X)
    scaled = predict_scores(fit_gbt(X * scale, y, params, seed=5), X * scale)
    np.testing.assert_array_equal(base, scaled)
    assert evaluate(base, y) == evaluate(scaled, y)


def test_scores_within_unit_interval(noisy_data):
    """Test boosted scores are probabilities."""
    X, y = noisy_data
    model = fit_gbt(X, y, BoostParams(n_estimators=20, learning_rate=1.0, l2_lambda=0.0))
    scores = predict_scores(model, X * 100)
    assert scores.min() >= 0.0
    assert scores.max() <= 1.0


def test_pos_weight_raises_positive_scores(noisy_data):
    """Test up-weighting positives shifts scores upward."""
    X, y = noisy_data
    plain = predict_scores(fit_gbt(X, y, BoostParams(n_estimators=10)), X)
    weighted = predict_scores(fit_gbt(X, y, BoostParams(n_estimators=10, pos_weight=5.0)), X)
    assert weighted.mean() > plain.mean()


def test_single_class_is_rejected():
    """Test boosting needs both classes."""
    with pytest.raises(DegenerateLabelsError):
        fit_gbt(np.zeros((5, 2)), np.ones(5, dtype=int))


def test_model_json_reproduces_scores(noisy_data):
    """Test a reloaded boosted model scores exactly like the original."""
    X, y = noisy_data
    model = fit_gbt(X, y, BoostParams(n_estimators=8, learning_rate=0.1), seed=0)
    reloaded = EnsembleModel.from_json(model.to_json())
    assert reloaded.kind is ModelKind.BOOSTED
    assert reloaded.learning_rate == 0.1
    np.testing.assert_array_equal(predict_scores(reloaded, X), predict_scores(model, X))
