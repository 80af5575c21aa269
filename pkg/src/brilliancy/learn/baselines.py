"""k-nearest-neighbors and Gaussian naive Bayes baselines. Both consume
already-normalized feature matrices."""
from __future__ import annotations

import numpy as np

_VAR_FLOOR = 1e-9


def knn_scores(k: int, X_train: np.ndarray, y_train: np.ndarray,
               X_query: np.ndarray) -> np.ndarray:
    """Fraction of positive labels among the k nearest training rows by
    Euclidean distance. Distance ties break by training-row index."""
    if k % 2 == 0:
        raise ValueError("k must be odd")
    if k > len(X_train):
        raise ValueError(f"k={k} exceeds {len(X_train)} training rows")
    y_train = np.asarray(y_train, dtype=np.float64)
    scores = np.empty(len(X_query))
    for i, x in enumerate(X_query):
        d2 = np.einsum("ij,ij->i", X_train - x, X_train - x)
        nearest = np.argsort(d2, kind="stable")[:k]
        scores[i] = y_train[nearest].mean()
    return scores


class GaussianNB:
    """Per-class per-feature Gaussians with a variance floor; class priors
    fixed at 0.5/0.5 so the score is a balanced posterior."""

    def __init__(self):
        self.means = None
        self.variances = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNB":
        y = np.asarray(y)
        if not ((y == 0).any() and (y == 1).any()):
            raise ValueError("both classes required to fit")
        self.means = {}
        self.variances = {}
        for cls in (0, 1):
            rows = X[y == cls]
            self.means[cls] = rows.mean(axis=0)
            self.variances[cls] = np.maximum(rows.var(axis=0), _VAR_FLOOR)
        return self

    def _log_likelihood(self, X: np.ndarray, cls: int) -> np.ndarray:
        mean = self.means[cls]
        var = self.variances[cls]
        return -0.5 * np.sum(np.log(2.0 * np.pi * var)
                             + (X - mean) ** 2 / var, axis=1)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        if self.means is None:
            raise RuntimeError("fit before predicting")
        log_pos = self._log_likelihood(X, 1)
        log_neg = self._log_likelihood(X, 0)
        # equal priors cancel; stable posterior via the log-odds
        return 1.0 / (1.0 + np.exp(np.clip(log_neg - log_pos, -700, 700)))
