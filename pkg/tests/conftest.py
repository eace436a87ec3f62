"""Shared fixtures: a small generated dataset, a trained model, and the
surrogate measurement grid. All session-scoped; everything is seeded."""

import pytest

from margin_probe.adaptation import SurrogateLinkProfile, measure_grid
from margin_probe.bayes_ridge import BayesRidgeModel
from margin_probe.dataset import feature_matrix, generate, labels, split


@pytest.fixture(scope="session")
def small_records():
    result = generate(400, master_seed=77)
    assert not result.errors
    return result.records


@pytest.fixture(scope="session")
def small_split(small_records):
    return split(small_records, seed=3)


@pytest.fixture(scope="session")
def small_model(small_split):
    return BayesRidgeModel.train(feature_matrix(small_split.train),
                                 labels(small_split.train))


@pytest.fixture(scope="session")
def surrogate_records():
    return measure_grid(SurrogateLinkProfile())
