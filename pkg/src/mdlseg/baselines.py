"""Reference segmenters: fixed-length chunks, oracle-count chunks, contiguous k-means."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .segmentation import Segmentation
from .validation import check_features, check_positive_int


def uniform_breaks(n: int, mean_len: int) -> Segmentation:
    """Breaks every ``mean_len`` frames."""
    n = check_positive_int(n, "n")
    mean_len = check_positive_int(mean_len, "mean_len")
    return Segmentation(n, tuple(range(mean_len, n, mean_len)))


def uniform_oracle_breaks(n: int, k_true: int) -> Segmentation:
    """``k_true`` segments of near-equal size: breaks at ``round(i * n / k_true)``."""
    n = check_positive_int(n, "n")
    k_true = check_positive_int(k_true, "k_true")
    if k_true > n:
        raise ValueError(f"cannot split {n} frames into {k_true} segments")
    # half-up rounding on exact rationals
    cuts = sorted({(2 * i * n + k_true) // (2 * k_true) for i in range(1, k_true)})
    return Segmentation(n, tuple(c for c in cuts if 0 < c < n))


def labels_to_breaks(labels, n: int | None = None) -> Segmentation:
    """Break wherever neighbouring frames carry different labels."""
    labels = np.asarray(labels)
    if n is not None and labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got {labels.size}")
    return Segmentation.from_labels(labels)


def lloyd_kmeans(X, n_clusters: int, max_iter: int = 100, seed: int = 0):
    """Plain Lloyd iteration started from ``n_clusters`` distinct sampled rows.

    Stops when assignments no longer change. Empty clusters keep their
    previous centre. Returns ``(labels, centers, n_iter)``.
    """
    X = check_features(X)
    n = X.shape[0]
    n_clusters = check_positive_int(n_clusters, "n_clusters")
    if n_clusters > n:
        raise ValueError(f"n_clusters={n_clusters} exceeds the number of frames {n}")
    rng = np.random.default_rng(seed)
    centers = X[np.sort(rng.choice(n, size=n_clusters, replace=False))].copy()
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = d2.argmin(axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(n_clusters):
            members = X[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    return labels, centers, it


def contiguous_kmeans(seq, k_clusters: int, max_iters: int = 100, seed: int = 0,
                      projection=None) -> Segmentation:
    """Cluster frames with k-means and break between differently labelled neighbours.

    ``projection`` is an optional ``d x p`` matrix applied to the features first.
    """
    X = check_features(seq)
    if projection is not None:
        X = X @ np.asarray(projection, dtype=np.float64)
    labels, _, _ = lloyd_kmeans(X, k_clusters, max_iters, seed)
    return labels_to_breaks(labels)


class _SegmenterMixin(ClusterMixin):
    def _store(self, seg: Segmentation):
        self.segmentation_ = seg
        self.breaks_ = list(seg.breaks)
        self.labels_ = seg.labels()
        self.n_segments_ = seg.n_segments
        return self


class UniformSegmenter(_SegmenterMixin, BaseEstimator):
    def __init__(self, mean_len=10):
        self.mean_len = mean_len

    def fit(self, X, y=None):
        return self._store(uniform_breaks(check_features(X).shape[0], self.mean_len))


class UniformOracleSegmenter(_SegmenterMixin, BaseEstimator):
    def __init__(self, n_segments=2):
        self.n_segments = n_segments

    def fit(self, X, y=None):
        return self._store(uniform_oracle_breaks(check_features(X).shape[0], self.n_segments))


class ContiguousKMeans(_SegmenterMixin, BaseEstimator):
    """k-means labels turned into contiguous segments.

    Two separated runs with the same cluster label become two segments.
    """

    def __init__(self, n_clusters=2, max_iter=100, random_state=0, projection=None):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.random_state = random_state
        self.projection = projection

    def fit(self, X, y=None):
        return self._store(contiguous_kmeans(X, self.n_clusters, self.max_iter,
                                             self.random_state, self.projection))
