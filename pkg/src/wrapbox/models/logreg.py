"""Multinomial logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import ValidationError
from ..validation import check_features, check_labels, check_query_matrix


def softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def loss_and_gradient(W, b, X, y, n_classes, l2):
    """Mean cross-entropy with an L2 penalty on the weights (not the bias).

    Returns (loss, dW, db); the analytic gradients are what training uses
    and what the finite-difference checks probe.
    """
    n = X.shape[0]
    P = softmax(X @ W.T + b)
    loss = -float(np.log(np.clip(P[np.arange(n), y], 1e-300, None)).mean())
    loss += 0.5 * l2 * float((W * W).sum())
    Y = np.zeros_like(P)
    Y[np.arange(n), y] = 1.0
    dW = (P - Y).T @ X / n + l2 * W
    db = (P - Y).mean(axis=0)
    return loss, dW, db


class LogisticBox(BaseEstimator, ClassifierMixin, TransformerMixin):
    """Softmax regression baseline; ``transform`` maps inputs to logits.

    Binary tasks threshold p(class 1) at ``tau``; multi-class takes the
    argmax with ties to the lowest class id. Weights start at zero, so
    fitting is deterministic.
    """

    def __init__(self, l2=1e-4, lr=0.1, epochs=500, tau=0.5, n_classes=None):
        self.l2 = l2
        self.lr = lr
        self.epochs = epochs
        self.tau = tau
        self.n_classes = n_classes

    def fit(self, X, y):
        X = check_features(X)
        y, n_classes = check_labels(y, X.shape[0], self.n_classes)
        if np.unique(y).size < 2:
            raise ValidationError("single-class training set")
        if not 0.0 < self.tau < 1.0:
            raise ValidationError(f"tau={self.tau} outside (0, 1)")
        self.n_classes_ = n_classes
        self.n_dims_ = X.shape[1]
        W = np.zeros((n_classes, X.shape[1]), dtype=np.float64)
        b = np.zeros(n_classes, dtype=np.float64)
        history = []
        for _ in range(self.epochs):
            loss, dW, db = loss_and_gradient(W, b, X, y, n_classes, self.l2)
            history.append(loss)
            W -= self.lr * dW
            b -= self.lr * db
        self.weights_ = W
        self.bias_ = b
        self.loss_history_ = history
        return self

    def decision_function(self, X):
        check_is_fitted(self, "weights_")
        X = check_query_matrix(X, self.n_dims_)
        return X @ self.weights_.T + self.bias_

    def transform(self, X):
        """Pre-softmax logit features, one column per class."""
        return self.decision_function(X)

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        P = self.predict_proba(X)
        if self.n_classes_ == 2:
            return (P[:, 1] >= self.tau).astype(np.int64)
        return np.argmax(P, axis=1).astype(np.int64)

    def predict_one(self, x) -> int:
        return int(self.predict(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def get_state(self) -> dict:
        return {"weights": self.weights_.tolist(), "bias": self.bias_.tolist()}

    def set_state(self, state, X=None, y=None):
        self.weights_ = np.asarray(state["weights"], dtype=np.float64)
        self.bias_ = np.asarray(state["bias"], dtype=np.float64)
        self.n_classes_ = self.weights_.shape[0]
        self.n_dims_ = self.weights_.shape[1]
        return self
