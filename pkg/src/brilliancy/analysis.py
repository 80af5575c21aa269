"""Evaluation metrics at a 50% base rate, the weak-evaluator perturbation
study, and the per-label win-chance distributions behind the violin plots.

Positives are brilliant moves; good and other moves together form the
negative class. PPV and NPV are computed from the rates (TPR/(TPR+FPR)
and TNR/(TNR+FNR)), which is what a 50% prevalence implies, rather than
from raw counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats as scipy_stats

from .features import (
    CHILD_OFF, IDX_CONTAINS, NUM_BLOCKS, SUB_IDX_Q, WEAK_POST_Q_INDICES,
    block_start,
)


@dataclass(frozen=True)
class ConfusionSummary:
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float = 0.5

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("negative confusion counts")
        if self.tp + self.fn == 0 or self.tn + self.fp == 0:
            raise ValueError("confusion summary needs both classes")

    @property
    def tpr(self) -> float:
        return self.tp / (self.tp + self.fn)

    @property
    def tnr(self) -> float:
        return self.tn / (self.tn + self.fp)

    @property
    def fpr(self) -> float:
        return 1.0 - self.tnr

    @property
    def fnr(self) -> float:
        return 1.0 - self.tpr

    @property
    def ppv(self) -> float:
        return balanced_ppv(self.tpr, self.tnr)

    @property
    def npv(self) -> float:
        return balanced_npv(self.tpr, self.tnr)

    @property
    def balanced_accuracy(self) -> float:
        return (self.tpr + self.tnr) / 2.0

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "threshold": self.threshold,
            "tpr": self.tpr, "tnr": self.tnr,
            "fpr": self.fpr, "fnr": self.fnr,
            "ppv": self.ppv, "npv": self.npv,
            "balanced_accuracy": self.balanced_accuracy,
        }


def balanced_ppv(tpr: float, tnr: float) -> float:
    """Positive predictive value at equal class prevalence."""
    fpr = 1.0 - tnr
    return tpr / (tpr + fpr)


def balanced_npv(tpr: float, tnr: float) -> float:
    fnr = 1.0 - tpr
    return tnr / (tnr + fnr)


def confusion_from_scores(y: np.ndarray, scores: np.ndarray,
                          threshold: float = 0.5) -> ConfusionSummary:
    y = np.asarray(y).astype(bool)
    pred = np.asarray(scores) >= threshold
    return ConfusionSummary(
        tp=int(np.sum(pred & y)), fp=int(np.sum(pred & ~y)),
        tn=int(np.sum(~pred & ~y)), fn=int(np.sum(~pred & y)),
        threshold=threshold)


def evaluate_model(checkpoint, X_raw: np.ndarray, labels,
                   threshold: float = 0.5) -> ConfusionSummary:
    """Confusion summary of a checkpoint; brilliant is the positive class."""
    if len(X_raw) == 0:
        raise ValueError("no rows to evaluate")
    y = np.asarray([label == "brilliant" for label in labels])
    scores = checkpoint.predict_scores(X_raw)
    return confusion_from_scores(y, scores, threshold)


@dataclass(frozen=True)
class PerturbationReport:
    deltas: np.ndarray
    mean: float
    sigma: float       # population standard deviation, as reported
    n: int
    t_stat: float
    p_value: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "sigma": self.sigma, "n": self.n,
                "t_stat": self.t_stat, "p_value": self.p_value}


def one_sample_t(deltas: np.ndarray):
    """Two-sided one-sample t-test of mean 0; the t statistic uses the
    sample (ddof=1) standard deviation."""
    n = len(deltas)
    mean = float(np.mean(deltas))
    sample_sd = float(np.std(deltas, ddof=1)) if n > 1 else 0.0
    if sample_sd == 0.0:
        return (0.0, 1.0) if mean == 0.0 else (np.inf, 0.0)
    t = mean / (sample_sd / np.sqrt(n))
    p = 2.0 * scipy_stats.t.sf(abs(t), n - 1)
    return t, float(p)


def maia_perturbation(checkpoint, X_raw: np.ndarray) -> PerturbationReport:
    """Set the post-move win chance to -1 in every weak-evaluator tree
    block (raw feature space), rescore, and report the score shift."""
    X_perturbed = X_raw.copy()
    for idx in WEAK_POST_Q_INDICES:
        X_perturbed[:, idx] = -1.0
    original = checkpoint.predict_scores(X_raw)
    perturbed = checkpoint.predict_scores(X_perturbed)
    deltas = perturbed - original
    t, p = one_sample_t(deltas)
    return PerturbationReport(
        deltas=deltas, mean=float(np.mean(deltas)),
        sigma=float(np.std(deltas)), n=len(deltas), t_stat=t, p_value=p)


class ViolinRow(NamedTuple):
    label: str
    evaluator: str
    budget: int
    q: float
    filled: bool


def violin_data(X_raw: np.ndarray, labels, evaluator: str, budget: int,
                evaluator_order=("strong", "weak"),
                budgets=None) -> list:
    """Post-move win chance per row for one (evaluator, budget) block.
    Rows whose tree lacks the move carry the fill value -1, flagged."""
    if budgets is None:
        from .features import DEFAULT_BUDGETS
        budgets = DEFAULT_BUDGETS
    e_idx = list(evaluator_order).index(evaluator)
    b_idx = list(budgets).index(budget)
    base = block_start(e_idx, b_idx)
    q_col = X_raw[:, base + CHILD_OFF + SUB_IDX_Q]
    filled_col = X_raw[:, base + IDX_CONTAINS] == 0.0
    return [ViolinRow(label=labels[i], evaluator=evaluator, budget=budget,
                      q=float(q_col[i]), filled=bool(filled_col[i]))
            for i in range(len(labels))]


def violin_csv(X_raw: np.ndarray, labels, evaluator_order=("strong", "weak"),
               budgets=None) -> str:
    """CSV across all blocks: label,evaluator,budget,q,filled."""
    if budgets is None:
        from .features import DEFAULT_BUDGETS
        budgets = DEFAULT_BUDGETS
    lines = ["label,evaluator,budget,q,filled"]
    for evaluator in evaluator_order:
        for budget in budgets:
            for row in violin_data(X_raw, labels, evaluator, budget,
                                   evaluator_order, budgets):
                lines.append(f"{row.label},{row.evaluator},{row.budget},"
                             f"{row.q!r},{int(row.filled)}")
    return "\n".join(lines) + "\n"
