"""Linear predictors: logistic regression and a linear-kernel SVM.

Both train by full-batch (sub)gradient descent from zero initialization on
standardized features, so training is deterministic without any seed. The
SVM gets a probability output through Platt scaling: a one-dimensional
logistic fit of the labels on the raw margins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError

# predicted probabilities are clipped into the open interval (0, 1)
PROB_EPS = 1e-15


def sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def softmax(scores: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis."""
    scores = np.asarray(scores, dtype=np.float64)
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def clip_proba(p: np.ndarray | float) -> np.ndarray | float:
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def log_loss(y: np.ndarray, proba: np.ndarray) -> float:
    """Mean binary cross-entropy with probabilities clipped at 1e-15."""
    p = np.clip(np.asarray(proba, dtype=np.float64), PROB_EPS, 1.0 - PROB_EPS)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def logit_bce(y: np.ndarray, margins: np.ndarray) -> float:
    """Mean binary cross-entropy straight from logits (no log(0) risk)."""
    m = np.asarray(margins, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    # softplus(m) - y*m, with softplus computed stably
    return float(np.mean(np.maximum(m, 0.0) + np.log1p(np.exp(-np.abs(m))) - y * m))


@dataclass(frozen=True)
class GdConfig:
    """Full-batch gradient-descent settings."""

    learning_rate: float = 0.1
    epochs: int = 500
    l2_lambda: float = 1e-3
    tolerance: float = 1e-8
    seed: int = 42

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")


@dataclass(frozen=True)
class LinearModelParams:
    """Weights/bias in standardized-feature space.

    kind is "logistic" or "svm"; svm params carry the Platt calibration
    pair (a, c) mapping margins to probabilities via sigmoid(a*margin + c).
    """

    weights: np.ndarray
    bias: float
    kind: str
    platt: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("logistic", "svm"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise NumericError("non-finite linear model parameters")


def decision_score(params: LinearModelParams, x: np.ndarray) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.weights.shape[0]:
        raise ValueError(
            f"expected {params.weights.shape[0]} features, got {x.shape[-1]}"
        )
    return x @ params.weights + params.bias


def logistic_predict_proba(params: LinearModelParams, x: np.ndarray) -> np.ndarray | float:
    if params.kind != "logistic":
        raise ValueError("params are not a logistic model")
    return clip_proba(sigmoid(decision_score(params, x)))


def svm_predict_proba(params: LinearModelParams, x: np.ndarray) -> np.ndarray | float:
    if params.kind != "svm" or params.platt is None:
        raise ValueError("params are not a Platt-calibrated svm model")
    a, c = params.platt
    return clip_proba(sigmoid(a * np.asarray(decision_score(params, x)) + c))


def bce_objective(
    w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, float]:
    """Regularized mean cross-entropy and its exact gradient.

    Loss = mean BCE + (l2/2)*||w||^2; the bias is not regularized.
    """
    margins = x @ w + b
    p = sigmoid(margins)
    loss = logit_bce(y, margins) + 0.5 * l2_lambda * float(w @ w)
    residual = p - y
    grad_w = x.T @ residual / len(y) + l2_lambda * w
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def train_logistic(x: np.ndarray, y: np.ndarray, config: GdConfig = GdConfig()) -> LinearModelParams:
    """Full-batch gradient descent on regularized cross-entropy.

    Zero initialization makes the result seed-free; stops at the epoch
    limit or when the loss improves by less than the tolerance.
    """
    config.validate()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("training data must be a nonempty (n, d) matrix")
    w = np.zeros(x.shape[1])
    b = 0.0
    prev = np.inf
    for _ in range(config.epochs):
        loss, gw, gb = bce_objective(w, b, x, y, config.l2_lambda)
        if not np.isfinite(loss):
            raise NumericError("logistic training loss is not finite")
        if prev - loss < config.tolerance:
            break
        prev = loss
        w = w - config.learning_rate * gw
        b = b - config.learning_rate * gb
    return LinearModelParams(weights=w, bias=b, kind="logistic")


def hinge_objective(
    w: np.ndarray, b: float, x: np.ndarray, y_pm: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, float]:
    """Mean hinge loss + (l2/2)*||w||^2 with a subgradient."""
    margins = y_pm * (x @ w + b)
    active = margins < 1.0
    loss = float(np.mean(np.maximum(0.0, 1.0 - margins))) + 0.5 * l2_lambda * float(w @ w)
    grad_w = -(x[active].T @ y_pm[active]) / len(y_pm) + l2_lambda * w
    grad_b = -float(np.sum(y_pm[active])) / len(y_pm)
    return loss, grad_w, grad_b


def fit_platt(margins: np.ndarray, y: np.ndarray, epochs: int = 2000, learning_rate: float = 0.5) -> tuple[float, float]:
    """1-D logistic regression of labels on margins: p = sigmoid(a*m + c)."""
    m = np.asarray(margins, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    a, c = 0.0, 0.0
    scale = max(1.0, float(np.abs(m).max()))  # keep steps stable for wide margins
    for _ in range(epochs):
        p = sigmoid(a * m + c)
        residual = p - y
        ga = float(np.mean(residual * m))
        gc = float(np.mean(residual))
        a -= learning_rate / scale**2 * ga
        c -= learning_rate * gc
    return a, c


def train_linear_svm(x: np.ndarray, y: np.ndarray, config: GdConfig = GdConfig()) -> LinearModelParams:
    """Subgradient descent on the hinge loss, then Platt calibration."""
    config.validate()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("training data must be a nonempty (n, d) matrix")
    y_pm = 2.0 * y - 1.0
    w = np.zeros(x.shape[1])
    b = 0.0
    prev = np.inf
    for _ in range(config.epochs):
        loss, gw, gb = hinge_objective(w, b, x, y_pm, config.l2_lambda)
        if not np.isfinite(loss):
            raise NumericError("svm training loss is not finite")
        if prev - loss < config.tolerance:
            break
        prev = loss
        w = w - config.learning_rate * gw
        b = b - config.learning_rate * gb
    a, c = fit_platt(x @ w + b, y)
    return LinearModelParams(weights=w, bias=b, kind="svm", platt=(a, c))
