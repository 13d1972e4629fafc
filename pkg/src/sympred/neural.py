"""Multilayer perceptron trained by backpropagation.

Architecture, optimizer, and schedule are deliberately small: relu hidden
layers, a sigmoid output, mean binary cross-entropy computed in logit form,
and adaptive-moment (Adam-style) updates over seeded mini-batches. A
per-epoch trace of train/validation loss and accuracy is recorded so the
training-vs-validation picture can be exported and plotted.

Training is invariant to the order of the input rows: rows are canonically
ordered (lexicographic over features, then label) before the seeded
shuffling takes over.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .linear import clip_proba, logit_bce, sigmoid
from .rng import substream


@dataclass(frozen=True)
class MlpArchitecture:
    layer_sizes: tuple[int, ...] = (7, 16, 8, 1)
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"

    def validate(self) -> None:
        if len(self.layer_sizes) < 3:
            raise ValueError("need at least one hidden layer")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError("layer sizes must be >= 1")
        if self.layer_sizes[-1] != 1:
            raise ValueError("output layer must have size 1")
        if self.hidden_activation != "relu" or self.output_activation != "sigmoid":
            raise ValueError("only relu hidden / sigmoid output supported")


@dataclass
class MlpParams:
    """Per-layer weight matrices (out, in) and bias vectors (out,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def validate(self) -> None:
        for w, b in zip(self.weights, self.biases):
            if w.shape[0] != b.shape[0]:
                raise ValueError("weight/bias shape mismatch")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError("non-finite network parameters")


@dataclass(frozen=True)
class MlpTrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 42

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


@dataclass(frozen=True)
class TraceEntry:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainingTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,train_acc,val_loss,val_acc"]
        for e in self.entries:
            lines.append(
                f"{e.epoch},{e.train_loss!r},{e.train_acc!r},{e.val_loss!r},{e.val_acc!r}"
            )
        return "\n".join(lines) + "\n"


def init_params(architecture: MlpArchitecture, rng: np.random.Generator) -> MlpParams:
    """He-style uniform initialization, U(-sqrt(6/fan_in), +sqrt(6/fan_in))."""
    weights, biases = [], []
    sizes = architecture.layer_sizes
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases)


def _forward_logits(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, list]:
    """Returns output logits (n,) and per-layer (pre_activation, activation)."""
    a = x
    cache = []
    last = len(params.weights) - 1
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        a = np.maximum(z, 0.0) if l < last else z
        cache.append((z, a))
    return cache[-1][0][:, 0], cache


def mlp_forward(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray | float, list]:
    """Probability in the open interval (0, 1) plus cached activations."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != params.weights[0].shape[1]:
        raise ValueError(
            f"expected {params.weights[0].shape[1]} inputs, got {x.shape[1]}"
        )
    logits, cache = _forward_logits(params, x)
    proba = clip_proba(sigmoid(logits))
    return (float(proba[0]) if single else proba), cache


def mlp_predict_proba(params: MlpParams, x: np.ndarray) -> np.ndarray | float:
    return mlp_forward(params, x)[0]


def mlp_gradients(
    params: MlpParams, x: np.ndarray, y: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Exact reverse-mode gradients of mean BCE over the batch."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("batch must be nonempty")
    n = len(x)
    logits, cache = _forward_logits(params, x)
    loss = logit_bce(y, logits)
    # d(mean BCE)/d(logit) = (sigmoid(logit) - y) / n
    delta = ((sigmoid(logits) - y) / n)[:, None]
    grads_w = [np.empty(0)] * len(params.weights)
    grads_b = [np.empty(0)] * len(params.weights)
    for l in range(len(params.weights) - 1, -1, -1):
        a_prev = x if l == 0 else cache[l - 1][1]
        grads_w[l] = delta.T @ a_prev
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ params.weights[l]) * (cache[l - 1][0] > 0.0)
    return grads_w, grads_b, loss


def _epoch_metrics(params: MlpParams, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    logits, _ = _forward_logits(params, x)
    loss = logit_bce(y, logits)
    acc = float(np.mean((logits >= 0.0) == (y == 1.0)))
    return loss, acc


def _canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    keys = [y] + [x[:, j] for j in range(x.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def train_mlp(
    x: np.ndarray,
    y: np.ndarray,
    architecture: MlpArchitecture = MlpArchitecture(),
    config: MlpTrainConfig = MlpTrainConfig(),
    x_val: np.ndarray | None = None,
    y_val: np.ndarray | None = None,
) -> tuple[MlpParams, TrainingTrace]:
    """Seeded init, seeded mini-batch shuffling, Adam-style updates.

    Validation metrics go into the trace only; nothing about training
    depends on them (no early stopping). Without a validation set the
    val columns are NaN.
    """
    architecture.validate()
    config.validate()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(y) == 0:
        raise ValueError("training data must be a nonempty (n, d) matrix")
    if x.shape[1] != architecture.layer_sizes[0]:
        raise ValueError(
            f"architecture expects {architecture.layer_sizes[0]} inputs, "
            f"data has {x.shape[1]}"
        )
    order = _canonical_order(x, y)
    x, y = x[order], y[order]

    rng = substream(config.seed, "mlp")
    params = init_params(architecture, rng)
    m_w = [np.zeros_like(w) for w in params.weights]
    v_w = [np.zeros_like(w) for w in params.weights]
    m_b = [np.zeros_like(b) for b in params.biases]
    v_b = [np.zeros_like(b) for b in params.biases]
    t = 0
    n = len(y)
    trace = TrainingTrace()
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            gw, gb, _ = mlp_gradients(params, x[batch], y[batch])
            t += 1
            c1 = 1.0 - config.beta1**t
            c2 = 1.0 - config.beta2**t
            for l in range(len(params.weights)):
                for g, mm, vv, target in (
                    (gw[l], m_w[l], v_w[l], params.weights[l]),
                    (gb[l], m_b[l], v_b[l], params.biases[l]),
                ):
                    mm *= config.beta1
                    mm += (1.0 - config.beta1) * g
                    vv *= config.beta2
                    vv += (1.0 - config.beta2) * g * g
                    target -= config.learning_rate * (mm / c1) / (
                        np.sqrt(vv / c2) + config.epsilon
                    )
        train_loss, train_acc = _epoch_metrics(params, x, y)
        if not np.isfinite(train_loss):
            raise NumericError(f"training loss diverged at epoch {epoch}")
        if x_val is not None and y_val is not None and len(x_val):
            val_loss, val_acc = _epoch_metrics(
                params, np.asarray(x_val, dtype=np.float64), np.asarray(y_val, dtype=np.float64)
            )
        else:
            val_loss, val_acc = float("nan"), float("nan")
        trace.entries.append(TraceEntry(epoch, train_loss, train_acc, val_loss, val_acc))
    params.validate()
    return params, trace
