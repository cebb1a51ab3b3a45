import pytest
import numpy as np
from graphmine import config as graphmine_config
from graphmine.data import Dataset, SyntheticSpec, generate_synthetic


@pytest.fixture
def tiny_csv(tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("f1,f2,Class\n1,2,0\n3,4,0\n5,6,1\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def small_dataset():
    """
    N=60, d=6, 10% minority in 2 clusters
    """
    return generate_synthetic(SyntheticSpec(n_samples=60, n_features=6, minority_fraction=0.1,
                                            n_minority_clusters=2, cluster_spread=0.5, seed=7))


@pytest.fixture
def random_dataset():
    def make(n=30, d=4, seed=0, minority=3):
        rng = np.random.default_rng(seed)
        labels = np.zeros(n, dtype=np.int8)
        labels[rng.choice(n, size=minority, replace=False)] = 1
        return Dataset(features=rng.standard_normal((n, d)),
                       labels=labels,
                       feature_names=["x%d" % j for j in range(d)])
    return make


@pytest.fixture
def fast_config():
    """
    A config small enough to run every pipeline in a test
    """
    return graphmine_config.resolve_config({
        "graph": {"k": 5},
        "model": {"hidden_dim": 8, "embedding_dim": 4},
        "train": {"epochs": 5},
        "synth": {"n_samples": 60, "n_features": 6, "minority_fraction": 0.1,
                  "n_minority_clusters": 2},
        "sweep": {"embedding_dims": [4, 2], "graph_methods": ["knn", "complete"]},
        "seed": 7,
    })
