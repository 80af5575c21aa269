"""Training: class-weighted BCE with decoupled weight decay (AdamW),
seeded shuffling and dropout, early stopping on validation class-balanced
accuracy, and JSON checkpoints (float32 on disk, float64 in memory)."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..features import DATUM_LEN
from .models import ArchitectureSpec, make_model
from .selectors import parse_selector, select_matrix

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_STD_FLOOR = 1e-8


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    weight_decay: float = 1e-5
    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    class_weighting: str = "balanced"  # or "none"

    def __post_init__(self):
        if self.lr <= 0 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("lr, batch_size, and max_epochs must be positive")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")

    def to_dict(self) -> dict:
        return {"lr": self.lr, "weight_decay": self.weight_decay,
                "batch_size": self.batch_size, "max_epochs": self.max_epochs,
                "patience": self.patience, "seed": self.seed,
                "class_weighting": self.class_weighting}


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "NormStats":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std < _STD_FLOOR, 1.0, std)
        return cls(mean=mean, std=std)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std


def class_weights(y: np.ndarray, mode: str = "balanced") -> np.ndarray:
    """Per-sample weights, inverse to class frequency, mean 1."""
    if mode == "none":
        return np.ones(len(y))
    n = len(y)
    n_pos = int(y.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("training rows contain a single class")
    w = np.where(y == 1, n / (2.0 * n_pos), n / (2.0 * n_neg))
    return w


def bce_with_logits(logits, y, weights):
    losses = np.maximum(logits, 0.0) - logits * y + np.log1p(np.exp(-np.abs(logits)))
    return float(np.mean(weights * losses))


def bce_grad(logits, y, weights):
    return weights * (_sigmoid(logits) - y) / len(y)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class AdamW:
    """Adam with decoupled weight decay; decay applies to weight matrices
    (names starting with "w"), not biases."""

    def __init__(self, params: dict, lr: float, weight_decay: float):
        self.lr = lr
        self.weight_decay = weight_decay
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        bc1 = 1.0 - ADAM_BETA1 ** self.t
        bc2 = 1.0 - ADAM_BETA2 ** self.t
        for key, grad in grads.items():
            m = self.m[key]
            v = self.v[key]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * grad
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * np.square(grad)
            update = (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
            if self.weight_decay and key.startswith("w"):
                params[key] -= self.lr * self.weight_decay * params[key]
            params[key] -= self.lr * update


@dataclass
class Checkpoint:
    spec: ArchitectureSpec
    params: dict
    norm: NormStats
    meta: dict = field(default_factory=dict)

    def predict_logits(self, X_raw: np.ndarray) -> np.ndarray:
        Xn = self.norm.apply(X_raw)
        Xs = select_matrix(parse_selector(self.spec.selector), Xn)
        model = make_model(self.spec, input_dim=Xs.shape[1])
        logits, _ = model.forward(self.params, Xs, train=False)
        return logits

    def predict_scores(self, X_raw: np.ndarray) -> np.ndarray:
        return _sigmoid(self.predict_logits(X_raw))

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        model = make_model(self.spec)
        layers = []
        for name in model.layer_shapes():
            w = self.params[f"w{name}"].astype(np.float32)
            b = self.params[f"b{name}"].astype(np.float32)
            layers.append({
                "name": name,
                "shape": list(w.shape),
                "weights": [float(x) for x in w.ravel()],
                "bias": [float(x) for x in b],
            })
        payload = {
            "arch": self.spec.to_dict(),
            "layers": layers,
            "norm": {
                "mean": [float(x) for x in self.norm.mean.astype(np.float32)],
                "std": [float(x) for x in self.norm.std.astype(np.float32)],
            },
            "meta": self.meta,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Checkpoint":
        payload = json.loads(text)
        spec = ArchitectureSpec.from_dict(payload["arch"])
        params = {}
        for layer in payload["layers"]:
            shape = tuple(layer["shape"])
            params[f"w{layer['name']}"] = np.asarray(
                layer["weights"], dtype=np.float64).reshape(shape)
            params[f"b{layer['name']}"] = np.asarray(layer["bias"],
                                                     dtype=np.float64)
        norm = NormStats(
            mean=np.asarray(payload["norm"]["mean"], dtype=np.float64),
            std=np.asarray(payload["norm"]["std"], dtype=np.float64))
        return cls(spec=spec, params=params, norm=norm,
                   meta=payload.get("meta", {}))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Checkpoint":
        with open(path) as fh:
            return cls.from_json(fh.read())


def _balanced_accuracy_from_scores(y, scores, threshold=0.5):
    pred = scores >= threshold
    pos = y == 1
    neg = ~pos
    tpr = float(pred[pos].mean()) if pos.any() else 0.0
    tnr = float((~pred[neg]).mean()) if neg.any() else 0.0
    return (tpr + tnr) / 2.0


def train(spec: ArchitectureSpec, cfg: TrainConfig,
          X_train: np.ndarray, y_train: np.ndarray,
          X_val: np.ndarray, y_val: np.ndarray) -> Checkpoint:
    """Minimize class-weighted BCE with AdamW; early stopping restores the
    best-epoch weights by validation balanced accuracy."""
    if len(X_train) == 0 or len(X_val) == 0:
        raise ValueError("empty training or validation split")
    if spec.selector != "all" and X_train.shape[1] != DATUM_LEN:
        raise ValueError(f"selector {spec.selector!r} needs the full "
                         f"{DATUM_LEN}-feature layout")
    y_train = np.asarray(y_train, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)
    weights_all = class_weights(y_train, cfg.class_weighting)

    norm = NormStats.fit(X_train)
    selector = parse_selector(spec.selector)
    Xn_train = select_matrix(selector, norm.apply(X_train))
    Xn_val = select_matrix(selector, norm.apply(X_val))

    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    rng_init = np.random.default_rng(seeds[0])
    rng_shuffle = np.random.default_rng(seeds[1])
    rng_dropout = np.random.default_rng(seeds[2])

    model = make_model(spec, input_dim=Xn_train.shape[1])
    params = model.init_params(rng_init)
    optimizer = AdamW(params, lr=cfg.lr, weight_decay=cfg.weight_decay)

    best_metric = -np.inf
    best_params = None
    best_epoch = 0
    epochs_without = 0
    epochs_run = 0

    n = len(Xn_train)
    for epoch in range(1, cfg.max_epochs + 1):
        epochs_run = epoch
        order = rng_shuffle.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, yb, wb = Xn_train[idx], y_train[idx], weights_all[idx]
            logits, cache = model.forward(params, xb, train=True,
                                          rng=rng_dropout)
            loss = bce_with_logits(logits, yb, wb)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}")
            grads = model.backward(params, cache, bce_grad(logits, yb, wb))
            optimizer.step(params, grads)

        val_logits, _ = model.forward(params, Xn_val, train=False)
        metric = _balanced_accuracy_from_scores(y_val, _sigmoid(val_logits))
        if metric > best_metric:
            best_metric = metric
            best_params = copy.deepcopy(params)
            best_epoch = epoch
            epochs_without = 0
        else:
            epochs_without += 1
            if epochs_without >= cfg.patience:
                break

    params = best_params if best_params is not None else params
    meta = {
        "seed": cfg.seed,
        "epochs_run": epochs_run,
        "best_epoch": best_epoch,
        "val_balanced_acc": best_metric,
        "train_config": cfg.to_dict(),
    }
    return Checkpoint(spec=spec, params=params, norm=norm, meta=meta)
