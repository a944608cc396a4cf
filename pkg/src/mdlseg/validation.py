"""Input checks shared by the estimators and metric functions."""

import numpy as np
from sklearn.utils.validation import check_array


def check_features(X):
    """2-d float64 array of finite values with at least one row and column."""
    if hasattr(X, "values") and hasattr(X, "timestamps"):
        X = X.values
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)


def check_labels(labels_true, labels_pred):
    a = np.asarray(labels_true)
    b = np.asarray(labels_pred)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("labels must be 1-d")
    if a.shape != b.shape:
        raise ValueError(f"label length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("labels must not be empty")
    return a, b


def check_positive_int(value, name):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
