"""VCDR-only logistic regression baseline."""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import SingleClassData


@dataclass(frozen=True)
class LogisticVcdrModel:
    slope: float
    intercept: float

    def predict_proba(self, vcdr):
        z = self.slope * np.asarray(vcdr, dtype=np.float64) + self.intercept
        return 0.5 * (1.0 + np.tanh(0.5 * z))


def fit_logistic_vcdr(vcdr, labels, n_iter: int = 2000, learning_rate: float = 1.0) -> LogisticVcdrModel:
    """Gradient ascent on the mean log-likelihood of ``label ~ sigmoid(a*vcdr + b)``.

    Optimization runs on the standardized feature; the returned slope and
    intercept are mapped back to raw VCDR units. A constant feature is left
    unscaled and its slope stays at zero.
    """
    v = np.asarray(vcdr, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(np.float64)
    if v.shape != y.shape:
        raise ValueError(f"{v.size} VCDR values but {y.size} labels")
    if y.min() == y.max():
        raise SingleClassData("logistic fit needs both classes")
    mu = v.mean()
    sd = v.std()
    if sd == 0:
        sd = 1.0
    u = (v - mu) / sd
    a = b = 0.0
    for _ in range(n_iter):
        p = 0.5 * (1.0 + np.tanh(0.5 * (a * u + b)))
        r = y - p
        a += learning_rate * np.mean(r * u)
        b += learning_rate * np.mean(r)
    return LogisticVcdrModel(a / sd, b - a * mu / sd)


def log_loss(model: LogisticVcdrModel, vcdr, labels) -> float:
    p = np.clip(model.predict_proba(vcdr), 1e-15, 1 - 1e-15)
    y = np.asarray(labels, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


class VcdrLogisticRegression(BaseEstimator, ClassifierMixin):
    """Scikit-learn wrapper around :func:`fit_logistic_vcdr`.

    ``X`` is a single VCDR column, ``(n, 1)`` or ``(n,)``.
    """

    def __init__(self, n_iter=2000, learning_rate=1.0):
        self.n_iter = n_iter
        self.learning_rate = learning_rate

    @staticmethod
    def _column(X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"expected a single VCDR column, got {X.shape[1]} features")
            X = X[:, 0]
        if not np.all(np.isfinite(X)):
            raise ValueError("VCDR values must be finite")
        return X

    def fit(self, X, y):
        self.model_ = fit_logistic_vcdr(self._column(X), y, self.n_iter, self.learning_rate)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = 1
        return self

    @property
    def slope_(self):
        return self.model_.slope

    @property
    def intercept_(self):
        return self.model_.intercept

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        p = self.model_.predict_proba(self._column(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(int)
