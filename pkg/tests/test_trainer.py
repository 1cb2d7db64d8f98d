import numpy as np
import pytest

from fedpop.errors import ParameterError
from fedpop.trainer import (
    TrainerSpec,
    local_train,
    regression_gradient,
    regression_loss,
    _client_dataset,
)


def test_synthetic_deterministic():
    spec = TrainerSpec(kind="synthetic", dimension=8, data_seed=3)
    assert local_train(spec, 1) == local_train(spec, 1)
    assert local_train(spec, 1) != local_train(spec, 2)


def test_synthetic_range():
    spec = TrainerSpec(kind="synthetic", dimension=64, data_seed=5)
    for seed in range(10):
        assert all(-1.0 <= x <= 1.0 for x in local_train(spec, seed))


def test_linear_zero_learning_rate_is_fixed_point():
    spec = TrainerSpec(kind="linear", dimension=4, learning_rate=0.0)
    assert local_train(spec, 7) == [0.0] * 4


def test_linear_single_epoch_matches_gradient_oracle():
    spec = TrainerSpec(kind="linear", dimension=5, data_seed=11, epochs=1, learning_rate=0.1)
    X, y = _client_dataset(spec, 3)
    w0 = np.zeros(5)
    oracle = (-spec.learning_rate * regression_gradient(X, y, w0)).tolist()
    assert local_train(spec, 3) == pytest.approx(oracle, rel=1e-12)


def test_fedavg_of_identical_data_equals_single_update():
    # clients sharing one dataset (same client seed) produce equal updates,
    # so their average equals any single update
    spec = TrainerSpec(kind="linear", dimension=3, data_seed=2, epochs=2)
    updates = [local_train(spec, 42) for _ in range(5)]
    mean = np.mean(updates, axis=0)
    assert mean.tolist() == pytest.approx(updates[0], rel=1e-12)


def test_aggregated_loss_non_increasing_over_rounds():
    spec = TrainerSpec(kind="linear", dimension=4, data_seed=9, epochs=1, learning_rate=0.05)
    client_seeds = [1, 2, 3]
    weights = [0.0] * 4
    losses = []
    for _ in range(5):
        losses.append(
            sum(regression_loss(spec, s, weights) for s in client_seeds) / len(client_seeds)
        )
        updates = [local_train(spec, s, weights) for s in client_seeds]
        avg = np.mean(updates, axis=0)
        weights = (np.asarray(weights) + avg).tolist()
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_spec_guards():
    with pytest.raises(ParameterError):
        TrainerSpec(kind="cnn")
    with pytest.raises(ParameterError):
        TrainerSpec(dimension=0)
    with pytest.raises(ParameterError):
        TrainerSpec(kind="linear", epochs=0)
    spec = TrainerSpec(kind="linear", dimension=3)
    with pytest.raises(ParameterError):
        local_train(spec, 1, params=[0.0, 0.0])


def test_spec_json_roundtrip():
    spec = TrainerSpec(kind="linear", dimension=6, data_seed=4, samples=12,
                       learning_rate=0.2, epochs=3)
    assert TrainerSpec.from_json(spec.to_json()) == spec
