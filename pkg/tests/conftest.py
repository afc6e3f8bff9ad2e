import numpy as np
import pytest

import qualmon as qm
from qualmon.data import DataView


@pytest.fixture(scope="session")
def small_dataset():
    """400-row synthetic set on the default 11-factor schema."""
    return qm.synth_generate(qm.default_schema(), 400, 0.15, seed=101)


@pytest.fixture(scope="session")
def small_split(small_dataset):
    return qm.holdout_split(small_dataset.n, 0.6, seed=5)


@pytest.fixture(scope="session")
def tiny_schema():
    return [
        qm.FactorSpec("speed", "continuous", bounds=(0.0, 10.0), controllable=True),
        qm.FactorSpec("mode", "discrete", states=("a", "b", "c")),
        qm.FactorSpec("temp", "continuous", bounds=(5.0, 25.0)),
    ]


def two_blobs(n_per=30, gap=3.0, seed=0, spread=0.3):
    """Linearly separable 2-D toy set."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_per, 2)) * spread
    b = rng.normal(size=(n_per, 2)) * spread + gap
    X = np.vstack([a, b])
    y = np.asarray([0] * n_per + [1] * n_per)
    return DataView(X=X, y=y)
