"""k-fold cross validation on class-balanced accuracy, and grid search."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

import numpy as np

from .baselines import GaussianNB, knn_scores
from .models import ArchitectureSpec, make_model, param_count
from .training import Checkpoint, NormStats, TrainConfig, train


def balanced_accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean of the per-class recalls for binary labels."""
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    pos = y_true
    neg = ~y_true
    if not pos.any() or not neg.any():
        raise ValueError("both classes required for balanced accuracy")
    tpr = float(y_pred[pos].mean())
    tnr = float((~y_pred)[neg].mean())
    return (tpr + tnr) / 2.0


@dataclass(frozen=True)
class CVResult:
    fold_scores: tuple
    k: int
    seed: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_scores))


def kfold_indices(n: int, k: int, seed: int) -> list:
    """k disjoint near-equal folds covering range(n), shuffled by seed."""
    order = np.random.default_rng(seed).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(order, k)]


def _fold_scores_nn(spec, cfg, X, y, folds):
    fold_seeds = np.random.SeedSequence(cfg.seed).generate_state(len(folds))
    scores = []
    for i, held_out in enumerate(folds):
        mask = np.ones(len(X), dtype=bool)
        mask[held_out] = False
        cfg_i = TrainConfig(**{**cfg.to_dict(), "seed": int(fold_seeds[i])})
        ckpt = train(spec, cfg_i, X[mask], y[mask], X[held_out], y[held_out])
        preds = ckpt.predict_scores(X[held_out]) >= 0.5
        scores.append(balanced_accuracy(y[held_out], preds))
    return scores


def _fold_scores_baseline(spec, X, y, folds):
    scores = []
    for held_out in folds:
        mask = np.ones(len(X), dtype=bool)
        mask[held_out] = False
        norm = NormStats.fit(X[mask])
        Xn_train = norm.apply(X[mask])
        Xn_test = norm.apply(X[held_out])
        if spec.kind == "knn":
            raw = knn_scores(spec.knn_k, Xn_train, y[mask], Xn_test)
        else:
            raw = GaussianNB().fit(Xn_train, y[mask]).predict_scores(Xn_test)
        scores.append(balanced_accuracy(y[held_out], raw >= 0.5))
    return scores


def cross_validate(spec: ArchitectureSpec, cfg: TrainConfig,
                   X: np.ndarray, y: np.ndarray,
                   k: int = 5, seed: int = 0) -> CVResult:
    if k < 2:
        raise ValueError("k must be >= 2")
    y = np.asarray(y)
    folds = kfold_indices(len(X), k, seed)
    for i, fold in enumerate(folds):
        fold_y = y[fold]
        if not ((fold_y == 1).any() and (fold_y == 0).any()):
            raise ValueError(f"fold {i} lacks both classes")
    if spec.kind in ("knn", "gnb"):
        scores = _fold_scores_baseline(spec, X, y, folds)
    else:
        scores = _fold_scores_nn(spec, cfg, X, y, folds)
    return CVResult(fold_scores=tuple(scores), k=k, seed=seed)


_SPEC_KEYS = {f.name for f in fields(ArchitectureSpec)}
_CFG_KEYS = {f.name for f in fields(TrainConfig)}


def split_grid_entry(entry: dict):
    """A flat grid-file map into (ArchitectureSpec, TrainConfig)."""
    unknown = set(entry) - _SPEC_KEYS - _CFG_KEYS
    if unknown:
        raise ValueError(f"unknown grid keys {sorted(unknown)}")
    spec = ArchitectureSpec(**{k: v for k, v in entry.items() if k in _SPEC_KEYS})
    cfg = TrainConfig(**{k: v for k, v in entry.items() if k in _CFG_KEYS})
    return spec, cfg


def grid_search(entries: list, X: np.ndarray, y: np.ndarray,
                k: int = 5, seed: int = 0):
    """Exhaustive CV over the grid. Returns (best_spec, best_cfg, table);
    the table row order follows the grid file. Ties break by fewer
    parameters, then by the canonical JSON form of the entry."""
    if not entries:
        raise ValueError("empty grid")
    table = []
    for entry in entries:
        spec, cfg = split_grid_entry(entry)
        result = cross_validate(spec, cfg, X, y, k=k, seed=seed)
        table.append({
            "config": entry,
            "mean_balanced_accuracy": result.mean,
            "fold_scores": list(result.fold_scores),
            "param_count": param_count(spec),
        })
    best_row = min(
        table,
        key=lambda row: (-row["mean_balanced_accuracy"], row["param_count"],
                         json.dumps(row["config"], sort_keys=True)))
    best_spec, best_cfg = split_grid_entry(best_row["config"])
    return best_spec, best_cfg, table


# Default grid: the best reported shape per kind plus nearby variants.
DEFAULT_GRID = [
    {"kind": "fcnn", "h1": 50},
    {"kind": "fcnn", "h1": 100},
    {"kind": "per_weight", "h1": 25, "h2": 200},
    {"kind": "per_size", "h1": 100, "h2": 50},
    {"kind": "per_weight_per_size", "h1": 100, "h2": 100, "h3": 25},
    {"kind": "agg_reduce", "h1": 25, "h2": 400, "h3": 50},
    {"kind": "agg_reduce", "h1": 16, "h2": 64, "h3": 32},
]
