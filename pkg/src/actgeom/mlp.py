"""A small fully connected classifier and its activation extraction.

Training is plain numpy: rectified hidden layers, softmax cross-entropy,
Adam updates, seeded shuffling. Everything stays in f64 and single threaded
so a (data, config, seed) triple always reproduces the same network. The
point of the model here is not benchmark accuracy but the activation
vectors its hidden layers induce, which downstream modules audit
geometrically.

Checkpoints use a little-endian binary layout: magic "MLPC", u32 version,
u32 affine layer count, per-layer u32 (in_dim, out_dim) pairs, then each
layer's f64 row-major weight matrix followed by its f64 bias vector.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import LabeledVectors
from .geometry import PointSet

__all__ = [
    "MlpConfig",
    "Mlp",
    "TrainReport",
    "ActivationSet",
    "TrainingDivergedError",
    "train_mlp",
    "extract_activations",
    "gradient_check",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_MAGIC = b"MLPC"
CHECKPOINT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; ``.epoch`` is where it happened."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


@dataclass(frozen=True)
class MlpConfig:
    """Architecture and optimizer settings."""

    layer_widths: tuple[int, ...] = (64, 64, 64, 64)
    n_classes: int = 10
    lr: float = 1e-3
    epochs: int = 30
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if len(self.layer_widths) < 1:
            raise ValueError("need at least one hidden layer")
        if any(w < 1 for w in self.layer_widths):
            raise ValueError("hidden widths must be >= 1")
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0:
            raise ValueError("bad optimizer settings")


@dataclass(frozen=True)
class TrainReport:
    train_accuracy: float
    test_accuracy: float
    loss_curve: tuple[float, ...]
    seed: int


@dataclass(frozen=True)
class ActivationSet:
    """Per-layer activation vectors for a labeled dataset split."""

    layer_index: int
    vectors: PointSet
    labels: np.ndarray
    split: str = "train"

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != self.vectors.n:
            raise ValueError("labels length must match vector rows")
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if self.layer_index < 1:
            raise ValueError("layer_index is 1-based")
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be train or test, got {self.split!r}")

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def class_rows(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


class Mlp:
    """Rectifier MLP with a softmax head; parameters held as numpy arrays."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or len(weights) < 2:
            raise ValueError("need matching weights/biases with >= 1 hidden layer")
        self.weights = weights
        self.biases = biases

    @classmethod
    def init(cls, in_dim: int, cfg: MlpConfig) -> "Mlp":
        rng = np.random.default_rng(cfg.seed)
        dims = [in_dim, *cfg.layer_widths, cfg.n_classes]
        weights, biases = [], []
        for a, b in zip(dims[:-1], dims[1:]):
            weights.append(rng.standard_normal((a, b)) * np.sqrt(2.0 / a))
            biases.append(np.zeros(b))
        return cls(weights, biases)

    @property
    def n_hidden(self) -> int:
        return len(self.weights) - 1

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_classes(self) -> int:
        return self.weights[-1].shape[1]

    def forward(self, X: np.ndarray):
        """Returns (hidden pre-activations, hidden activations, probabilities)."""
        pre, post = [], []
        h = X
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            z = h @ W + b
            h = np.maximum(z, 0.0)
            pre.append(z)
            post.append(h)
        logits = h @ self.weights[-1] + self.biases[-1]
        logits = logits - logits.max(axis=1, keepdims=True)
        expl = np.exp(logits)
        probs = expl / expl.sum(axis=1, keepdims=True)
        return pre, post, probs

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.forward(np.asarray(X, dtype=np.float64))[2]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def accuracy(self, X: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray):
        """Mean cross-entropy and its parameter gradients for one batch."""
        n = X.shape[0]
        pre, post, probs = self.forward(X)
        eps = 1e-300
        loss = -float(np.mean(np.log(probs[np.arange(n), y] + eps)))
        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        for layer in range(len(self.weights) - 1, -1, -1):
            inp = X if layer == 0 else post[layer - 1]
            grads_w[layer] = inp.T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = delta @ self.weights[layer].T
                delta[pre[layer - 1] <= 0.0] = 0.0
        return loss, grads_w, grads_b


def train_mlp(train: LabeledVectors, test: LabeledVectors, cfg: MlpConfig) -> tuple[Mlp, TrainReport]:
    """Train by minibatch Adam on softmax cross-entropy; seeded, deterministic.

    Raises TrainingDivergedError (with the epoch index) if the loss goes
    non-finite.
    """
    X, y = train.vectors.points, train.labels
    Xt, yt = test.vectors.points, test.labels
    if X.shape[1] != Xt.shape[1]:
        raise ValueError("train/test dimension mismatch")
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain at least 2 classes")
    model = Mlp.init(X.shape[1], cfg)
    rng = np.random.default_rng(cfg.seed + 1)

    b1, b2, adam_eps = 0.9, 0.999, 1e-8
    m_w = [np.zeros_like(w) for w in model.weights]
    v_w = [np.zeros_like(w) for w in model.weights]
    m_b = [np.zeros_like(b) for b in model.biases]
    v_b = [np.zeros_like(b) for b in model.biases]
    step = 0
    losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(X.shape[0])
        epoch_loss = 0.0
        batches = 0
        for lo in range(0, X.shape[0], cfg.batch_size):
            idx = order[lo:lo + cfg.batch_size]
            loss, gw, gb = model.loss_and_grads(X[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}", epoch=epoch
                )
            epoch_loss += loss
            batches += 1
            step += 1
            corr1 = 1.0 - b1 ** step
            corr2 = 1.0 - b2 ** step
            for i in range(len(model.weights)):
                m_w[i] = b1 * m_w[i] + (1 - b1) * gw[i]
                v_w[i] = b2 * v_w[i] + (1 - b2) * gw[i] ** 2
                model.weights[i] -= cfg.lr * (m_w[i] / corr1) / (np.sqrt(v_w[i] / corr2) + adam_eps)
                m_b[i] = b1 * m_b[i] + (1 - b1) * gb[i]
                v_b[i] = b2 * v_b[i] + (1 - b2) * gb[i] ** 2
                model.biases[i] -= cfg.lr * (m_b[i] / corr1) / (np.sqrt(v_b[i] / corr2) + adam_eps)
        losses.append(epoch_loss / max(batches, 1))
    report = TrainReport(
        train_accuracy=model.accuracy(X, y),
        test_accuracy=model.accuracy(Xt, yt),
        loss_curve=tuple(losses),
        seed=cfg.seed,
    )
    return model, report


def extract_activations(model: Mlp, data: LabeledVectors, layer_index: int,
                        split: str = "train", pre_activation: bool = False) -> ActivationSet:
    """Activation vectors of one hidden layer for every row of ``data``.

    ``layer_index`` is 1-based over hidden layers. Post-rectifier outputs by
    default; ``pre_activation`` switches to the affine outputs.
    """
    if not (1 <= layer_index <= model.n_hidden):
        raise ValueError(
            f"layer_index must be in [1, {model.n_hidden}], got {layer_index}"
        )
    pre, post, _ = model.forward(data.vectors.points)
    acts = pre[layer_index - 1] if pre_activation else post[layer_index - 1]
    return ActivationSet(
        layer_index=layer_index,
        vectors=PointSet(acts),
        labels=data.labels,
        split=split,
    )


def _flat_params(model: Mlp):
    arrays = model.weights + model.biases
    sizes = [a.size for a in arrays]
    return arrays, sizes


def gradient_check(model: Mlp, X, y, n_coords: int = 40, step: float = 1e-5,
                   seed: int = 0) -> float:
    """Max relative error of backprop gradients vs central differences.

    Probes ``n_coords`` random parameter coordinates; relative error uses
    |a-n| / max(1e-8, |a| + |n|).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    _, gw, gb = model.loss_and_grads(X, y)
    analytic = gw + gb
    arrays, sizes = _flat_params(model)
    total = sum(sizes)
    rng = np.random.default_rng(seed)
    coords = rng.choice(total, size=min(n_coords, total), replace=False)
    worst = 0.0
    for c in coords:
        ai = 0
        off = int(c)
        while off >= sizes[ai]:
            off -= sizes[ai]
            ai += 1
        flat = arrays[ai].reshape(-1)
        orig = flat[off]
        flat[off] = orig + step
        lp, _, _ = model.loss_and_grads(X, y)
        flat[off] = orig - step
        lm, _, _ = model.loss_and_grads(X, y)
        flat[off] = orig
        numeric = (lp - lm) / (2 * step)
        a = float(analytic[ai].reshape(-1)[off])
        rel = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
        worst = max(worst, rel)
    return worst


def save_checkpoint(model: Mlp, path):
    path = Path(path)
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(model.weights)))
        for W in model.weights:
            f.write(struct.pack("<II", W.shape[0], W.shape[1]))
        for W, b in zip(model.weights, model.biases):
            f.write(W.astype("<f8").tobytes())
            f.write(b.astype("<f8").tobytes())


def load_checkpoint(path) -> Mlp:
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: bad checkpoint magic {magic!r}")
        version, n_layers = struct.unpack("<II", f.read(8))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        dims = [struct.unpack("<II", f.read(8)) for _ in range(n_layers)]
        weights, biases = [], []
        for a, b in dims:
            wraw = f.read(a * b * 8)
            braw = f.read(b * 8)
            if len(wraw) != a * b * 8 or len(braw) != b * 8:
                raise ValueError(f"{path}: truncated checkpoint")
            weights.append(np.frombuffer(wraw, dtype="<f8").reshape(a, b).copy())
            biases.append(np.frombuffer(braw, dtype="<f8").copy())
        if f.read(1):
            raise ValueError(f"{path}: trailing bytes after checkpoint payload")
    for (a, b), (a2, b2) in zip(zip([w.shape[0] for w in weights], [w.shape[1] for w in weights]), dims):
        pass
    for i in range(len(weights) - 1):
        if weights[i].shape[1] != weights[i + 1].shape[0]:
            raise ValueError(f"{path}: inconsistent layer dimensions")
    return Mlp(weights, biases)
