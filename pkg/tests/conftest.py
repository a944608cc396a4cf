import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mdlseg import FeatureSequence, MdlParams, Segmentation  # noqa: E402


def random_instance(rng, n, d):
    """Small sequence with constant, clustered or pure-noise structure, and
    coding parameters chosen so optima range from one segment to many."""
    kind = rng.choice(["constant", "cluster", "noise"])
    if kind == "constant":
        values = np.tile(rng.normal(size=d), (n, 1))
    elif kind == "noise":
        values = rng.normal(scale=rng.choice([0.01, 1.0, 10.0]), size=(n, d))
    else:
        n_seg = int(rng.integers(1, min(n, 4) + 1))
        cuts = np.sort(rng.choice(np.arange(1, n), size=n_seg - 1, replace=False)) if n_seg > 1 else []
        labels = np.zeros(n, dtype=int)
        labels[list(cuts)] = 1
        labels = np.cumsum(labels)
        means = rng.normal(scale=rng.choice([1.0, 20.0]), size=(n_seg, d))
        values = means[labels] + rng.normal(scale=0.05, size=(n, d))
    params = MdlParams(
        precision_bits=int(rng.choice([16, 32, 64])) if rng.random() < 0.5 else None,
        max_scene_len=None if rng.random() < 0.7 else int(rng.integers(1, n + 1)),
        var_floor=float(rng.choice([1e-4, 1e-2])),
    )
    return FeatureSequence(values), params


def random_segmentation(rng, n, max_breaks=None):
    pool = np.arange(1, n)
    k = int(rng.integers(0, (len(pool) if max_breaks is None else min(max_breaks, len(pool))) + 1))
    return Segmentation(n, tuple(np.sort(rng.choice(pool, size=k, replace=False)).tolist()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
