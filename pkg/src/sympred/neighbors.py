"""k-nearest-neighbors classifier (lazy learner).

The model is the training set itself: a standardized feature matrix and
its labels. Queries take Euclidean distances against every stored row;
distance ties break toward the lower training index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CHUNK = 256  # queries per distance-matrix block


@dataclass
class KnnModel:
    x: np.ndarray
    y: np.ndarray
    k: int
    distance: str = "euclidean"


def fit_knn(x: np.ndarray, y: np.ndarray, k: int = 5) -> KnnModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(y) == 0:
        raise ValueError("training data must be a nonempty (n, d) matrix")
    if not 1 <= k <= len(y):
        raise ValueError(f"k must be in [1, {len(y)}], got {k}")
    return KnnModel(x=x, y=y, k=k)


def knn_predict_proba(model: KnnModel, x: np.ndarray) -> np.ndarray | float:
    """Fraction of positive labels among the k nearest training rows."""
    if model.x is None or len(model.x) == 0:
        raise ValueError("empty model")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    q = x[None, :] if single else x
    if q.shape[1] != model.x.shape[1]:
        raise ValueError(f"expected {model.x.shape[1]} features, got {q.shape[1]}")
    out = np.empty(len(q))
    for start in range(0, len(q), _CHUNK):
        block = q[start : start + _CHUNK]
        d2 = np.sum((model.x[None, :, :] - block[:, None, :]) ** 2, axis=2)
        # stable sort keeps lower training indices first on exact ties
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
        out[start : start + _CHUNK] = model.y[nearest].mean(axis=1)
    return float(out[0]) if single else out
