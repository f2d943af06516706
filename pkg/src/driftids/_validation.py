"""Small input-validation helpers shared by the estimators."""

import numpy as np

from .exceptions import LengthMismatch


def as_float_matrix(X, n_features=None, name="X"):
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"{name} has {X.shape[1]} columns, expected {n_features}")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_binary_vector(y, n=None, name="y"):
    """Coerce to a 1-D int array of 0/1 values."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {y.shape}")
    y = y.astype(np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 values")
    if n is not None and len(y) != n:
        raise LengthMismatch(f"{name} has length {len(y)}, expected {n}")
    return y
