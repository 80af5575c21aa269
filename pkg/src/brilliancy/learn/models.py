"""Network architectures with hand-derived backpropagation.

All models map a normalized (n, d) matrix to logits (n,); sigmoid and the
loss live in the training code. Hidden layers apply dropout (inverted
scaling, train mode only) then ReLU, per tier. Tier weights are shared
across the blocks a tier iterates over, so gradients accumulate over the
block axis.

Block geometry of the 3980-feature input: reshape to (n, 10, 398) with
strong-evaluator blocks 0..4 and weak blocks 5..9, budgets ascending.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..features import DATUM_LEN, KEY_LEN, NUM_BLOCKS, TREE_LEN
from .selectors import FeatureSelector, parse_selector, selector_dim

ARCH_KINDS = ("logreg", "knn", "gnb", "fcnn", "per_weight", "per_size",
              "per_weight_per_size", "agg_reduce")

_N_SIZES = NUM_BLOCKS // 2  # 5 budgets per evaluator


@dataclass(frozen=True)
class ArchitectureSpec:
    kind: str
    h1: Optional[int] = None
    h2: Optional[int] = None
    h3: Optional[int] = None
    dropout: float = 0.20
    selector: str = "all"
    knn_k: int = 5

    def __post_init__(self):
        if self.kind not in ARCH_KINDS:
            raise ValueError(f"unknown architecture kind {self.kind!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        for h in (self.h1, self.h2, self.h3):
            if h is not None and h < 1:
                raise ValueError("hidden sizes must be >= 1")
        if self.selector != "all" and self.kind != "logreg":
            raise ValueError("feature selectors are for the logreg ablations")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "h1": self.h1, "h2": self.h2,
                "h3": self.h3, "dropout": self.dropout,
                "selector": self.selector, "knn_k": self.knn_k}

    @classmethod
    def from_dict(cls, payload: dict) -> "ArchitectureSpec":
        return cls(**payload)


# Best shapes reported per kind; used when sizes are not given.
_DEFAULT_SHAPES = {
    "fcnn": (50, None, None),
    "per_weight": (25, 200, None),
    "per_size": (100, 50, None),
    "per_weight_per_size": (100, 100, 25),
    "agg_reduce": (25, 400, 50),
}


def default_spec(kind: str, **overrides) -> ArchitectureSpec:
    h1, h2, h3 = _DEFAULT_SHAPES.get(kind, (None, None, None))
    spec = ArchitectureSpec(kind=kind, h1=h1, h2=h2, h3=h3)
    return replace(spec, **overrides) if overrides else spec


def _relu(x):
    return np.maximum(x, 0.0)


def _dropout_mask(rng, shape, p):
    return (rng.random(shape) >= p) / (1.0 - p)


class _Hidden:
    """Linear -> dropout -> ReLU applied to the trailing axis, with the
    layer shared across any leading block axes."""

    @staticmethod
    def forward(x, w, b, train, p, rng):
        z = x @ w + b
        if train and p > 0.0:
            mask = _dropout_mask(rng, z.shape, p)
            zd = z * mask
        else:
            mask = None
            zd = z
        return _relu(zd), (x, zd, mask)

    @staticmethod
    def backward(d_out, w, cache, p):
        x, zd, mask = cache
        dz = d_out * (zd > 0)
        if mask is not None:
            dz = dz * mask
        axes = tuple(range(x.ndim - 1))
        dw = np.tensordot(x, dz, axes=(axes, axes))
        db = dz.sum(axis=axes)
        dx = dz @ w.T
        return dx, dw, db


class _ModelBase:
    layer_names: tuple

    def __init__(self, spec: ArchitectureSpec, input_dim: Optional[int] = None):
        self.spec = spec
        self.dropout = spec.dropout
        if input_dim is not None and self.requires_block_layout() \
                and input_dim != DATUM_LEN:
            raise ValueError(
                f"{spec.kind} needs the full {DATUM_LEN}-feature block layout")
        self.input_dim = input_dim

    def requires_block_layout(self) -> bool:
        return True

    def init_params(self, rng) -> dict:
        params = {}
        for name, (fan_in, fan_out) in self.layer_shapes().items():
            scale = np.sqrt(2.0 / fan_in)
            params[f"w{name}"] = rng.normal(0.0, scale, size=(fan_in, fan_out))
            params[f"b{name}"] = np.zeros(fan_out)
        return params

    def layer_shapes(self) -> dict:
        raise NotImplementedError

    def param_count(self) -> int:
        return sum((fi * fo) + fo for fi, fo in self.layer_shapes().values())


class LogisticRegression(_ModelBase):
    def __init__(self, spec, input_dim=None):
        super().__init__(spec, input_dim)
        self.selector = parse_selector(spec.selector)
        self.dim = input_dim if input_dim is not None \
            else selector_dim(self.selector)

    def requires_block_layout(self):
        return False

    def layer_shapes(self):
        return {"out": (self.dim, 1)}

    def init_params(self, rng):
        # convex problem: start at zero instead of a random point
        return {"wout": np.zeros((self.dim, 1)), "bout": np.zeros(1)}

    def forward(self, params, X, train=False, rng=None):
        logits = (X @ params["wout"] + params["bout"])[:, 0]
        return logits, {"X": X}

    def backward(self, params, cache, dlogits):
        X = cache["X"]
        return {"wout": X.T @ dlogits[:, None],
                "bout": np.array([dlogits.sum()])}


class FullyConnected(_ModelBase):
    def requires_block_layout(self):
        return False

    def layer_shapes(self):
        in_dim = self.input_dim if self.input_dim is not None else DATUM_LEN
        return {"1": (in_dim, self.spec.h1), "out": (self.spec.h1, 1)}

    def forward(self, params, X, train=False, rng=None):
        a1, c1 = _Hidden.forward(X, params["w1"], params["b1"],
                                 train, self.dropout, rng)
        logits = (a1 @ params["wout"] + params["bout"])[:, 0]
        return logits, {"c1": c1, "a1": a1}

    def backward(self, params, cache, dlogits):
        a1 = cache["a1"]
        grads = {"wout": a1.T @ dlogits[:, None],
                 "bout": np.array([dlogits.sum()])}
        da1 = dlogits[:, None] @ params["wout"].T
        _, dw1, db1 = _Hidden.backward(da1, params["w1"], cache["c1"],
                                       self.dropout)
        grads["w1"] = dw1
        grads["b1"] = db1
        return grads


class _TwoTier(_ModelBase):
    """Shared tier-1 over grouped blocks, flatten, tier-2, output.
    PerWeight groups by evaluator (2 x 1990); PerSize by budget (5 x 796)."""

    n_groups: int

    def group_blocks(self, X):
        raise NotImplementedError

    def group_width(self) -> int:
        raise NotImplementedError

    def layer_shapes(self):
        return {"1": (self.group_width(), self.spec.h1),
                "2": (self.n_groups * self.spec.h1, self.spec.h2),
                "out": (self.spec.h2, 1)}

    def forward(self, params, X, train=False, rng=None):
        xg = self.group_blocks(X)                       # (n, G, width)
        a1, c1 = _Hidden.forward(xg, params["w1"], params["b1"],
                                 train, self.dropout, rng)
        flat = a1.reshape(X.shape[0], -1)               # (n, G*h1)
        a2, c2 = _Hidden.forward(flat, params["w2"], params["b2"],
                                 train, self.dropout, rng)
        logits = (a2 @ params["wout"] + params["bout"])[:, 0]
        return logits, {"c1": c1, "c2": c2, "a1": a1, "a2": a2}

    def backward(self, params, cache, dlogits):
        a2 = cache["a2"]
        grads = {"wout": a2.T @ dlogits[:, None],
                 "bout": np.array([dlogits.sum()])}
        da2 = dlogits[:, None] @ params["wout"].T
        dflat, dw2, db2 = _Hidden.backward(da2, params["w2"], cache["c2"],
                                           self.dropout)
        grads["w2"] = dw2
        grads["b2"] = db2
        da1 = dflat.reshape(cache["a1"].shape)
        _, dw1, db1 = _Hidden.backward(da1, params["w1"], cache["c1"],
                                       self.dropout)
        grads["w1"] = dw1
        grads["b1"] = db1
        return grads


class PerWeight(_TwoTier):
    n_groups = 2

    def group_width(self):
        return _N_SIZES * TREE_LEN

    def group_blocks(self, X):
        return X.reshape(X.shape[0], 2, _N_SIZES * TREE_LEN)


class PerSize(_TwoTier):
    n_groups = _N_SIZES

    def group_width(self):
        return 2 * TREE_LEN

    def group_blocks(self, X):
        xb = X.reshape(X.shape[0], NUM_BLOCKS, TREE_LEN)
        return np.concatenate([xb[:, :_N_SIZES, :], xb[:, _N_SIZES:, :]],
                              axis=2)


class _ThreeTier(_ModelBase):
    """Shared tier-1 per (evaluator, budget) block, shared tier-2 per
    budget, tier-3 over the concatenated budget representations."""

    def tier2_width(self) -> int:
        raise NotImplementedError

    def tier2_input(self, a1, xb):
        raise NotImplementedError

    def tier2_input_grad(self, dt2, a1_shape):
        raise NotImplementedError

    def layer_shapes(self):
        return {"1": (TREE_LEN, self.spec.h1),
                "2": (self.tier2_width(), self.spec.h2),
                "3": (_N_SIZES * self.spec.h2, self.spec.h3),
                "out": (self.spec.h3, 1)}

    def forward(self, params, X, train=False, rng=None):
        xb = X.reshape(X.shape[0], NUM_BLOCKS, TREE_LEN)
        a1, c1 = _Hidden.forward(xb, params["w1"], params["b1"],
                                 train, self.dropout, rng)     # (n, 10, h1)
        t2 = self.tier2_input(a1, xb)                           # (n, 5, w2)
        a2, c2 = _Hidden.forward(t2, params["w2"], params["b2"],
                                 train, self.dropout, rng)     # (n, 5, h2)
        flat = a2.reshape(X.shape[0], -1)
        a3, c3 = _Hidden.forward(flat, params["w3"], params["b3"],
                                 train, self.dropout, rng)     # (n, h3)
        logits = (a3 @ params["wout"] + params["bout"])[:, 0]
        cache = {"c1": c1, "c2": c2, "c3": c3,
                 "a1": a1, "a2": a2, "a3": a3}
        return logits, cache

    def backward(self, params, cache, dlogits):
        a3 = cache["a3"]
        grads = {"wout": a3.T @ dlogits[:, None],
                 "bout": np.array([dlogits.sum()])}
        da3 = dlogits[:, None] @ params["wout"].T
        dflat, dw3, db3 = _Hidden.backward(da3, params["w3"], cache["c3"],
                                           self.dropout)
        grads["w3"] = dw3
        grads["b3"] = db3
        da2 = dflat.reshape(cache["a2"].shape)
        dt2, dw2, db2 = _Hidden.backward(da2, params["w2"], cache["c2"],
                                         self.dropout)
        grads["w2"] = dw2
        grads["b2"] = db2
        da1 = self.tier2_input_grad(dt2, cache["a1"].shape)
        _, dw1, db1 = _Hidden.backward(da1, params["w1"], cache["c1"],
                                       self.dropout)
        grads["w1"] = dw1
        grads["b1"] = db1
        return grads


class PerWeightPerSize(_ThreeTier):
    def tier2_width(self):
        return 2 * self.spec.h1

    def tier2_input(self, a1, xb):
        # per budget s: [h1_strong(s), h1_weak(s)]
        return np.concatenate([a1[:, :_N_SIZES, :], a1[:, _N_SIZES:, :]],
                              axis=2)

    def tier2_input_grad(self, dt2, a1_shape):
        h1 = self.spec.h1
        da1 = np.empty(a1_shape)
        da1[:, :_N_SIZES, :] = dt2[:, :, :h1]
        da1[:, _N_SIZES:, :] = dt2[:, :, h1:]
        return da1


class AggReduce(_ThreeTier):
    """Tier 2 re-injects the 46 key features of both trees per budget:
    [h1_strong, key_strong, h1_weak, key_weak]."""

    def tier2_width(self):
        return 2 * (self.spec.h1 + KEY_LEN)

    def tier2_input(self, a1, xb):
        key = xb[:, :, :KEY_LEN]
        return np.concatenate([a1[:, :_N_SIZES, :], key[:, :_N_SIZES, :],
                               a1[:, _N_SIZES:, :], key[:, _N_SIZES:, :]],
                              axis=2)

    def tier2_input_grad(self, dt2, a1_shape):
        h1 = self.spec.h1
        da1 = np.empty(a1_shape)
        da1[:, :_N_SIZES, :] = dt2[:, :, :h1]
        da1[:, _N_SIZES:, :] = dt2[:, :, h1 + KEY_LEN:2 * h1 + KEY_LEN]
        return da1


_MODEL_CLASSES = {
    "logreg": LogisticRegression,
    "fcnn": FullyConnected,
    "per_weight": PerWeight,
    "per_size": PerSize,
    "per_weight_per_size": PerWeightPerSize,
    "agg_reduce": AggReduce,
}

GRADIENT_KINDS = tuple(_MODEL_CLASSES)


def make_model(spec: ArchitectureSpec, input_dim: Optional[int] = None):
    if spec.kind not in _MODEL_CLASSES:
        raise ValueError(f"{spec.kind} has no gradient model")
    return _MODEL_CLASSES[spec.kind](spec, input_dim)


def param_count(spec: ArchitectureSpec) -> int:
    return make_model(spec).param_count() if spec.kind in _MODEL_CLASSES else 0
