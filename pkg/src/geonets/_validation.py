"""Input validation helpers shared by the functional and estimator APIs."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array


def check_series_pair(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"series lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("series need at least 2 samples")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("series contain non-finite values")
    return x, y


def check_series_matrix(values):
    """(n_series, n_times) float array, finite, with at least 2 time steps."""
    values = check_array(values, dtype=float, ensure_min_samples=1,
                         ensure_min_features=2)
    return values


def check_bins(bins):
    if not isinstance(bins, numbers.Integral) or bins < 2:
        raise ValueError(f"bins must be an integer >= 2, got {bins!r}")


def check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def check_similarity(values):
    """Square, symmetric, finite similarity matrix."""
    values = check_array(values, dtype=float, ensure_min_samples=1,
                         ensure_min_features=1)
    if values.shape[0] != values.shape[1]:
        raise ValueError(f"similarity matrix must be square, got {values.shape}")
    if not np.array_equal(values, values.T):
        raise ValueError("similarity matrix must be symmetric")
    return values
