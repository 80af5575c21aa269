"""Feature subsets for the logistic-regression ablations.

String forms:
    all
    is_best_move
    win_chance:<strong|weak|both>:<max|all>

Win-chance selectors pull the parent-board Q, the post-move Q, and their
difference from each selected tree block; budgets select by position
(max = largest budget only, all = all five).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import (
    CHILD_OFF, IDX_IS_BEST, NUM_BLOCKS, PARENT_OFF, SUB_IDX_Q, block_start,
)

_N_BUDGETS = NUM_BLOCKS // 2


@dataclass(frozen=True)
class FeatureSelector:
    kind: str                     # "all" | "win_chance" | "is_best_move"
    evaluators: tuple = (0, 1)    # evaluator indices (0 strong, 1 weak)
    budgets: tuple = tuple(range(_N_BUDGETS))  # budget indices

    def __str__(self) -> str:
        if self.kind != "win_chance":
            return self.kind
        evals = {(0,): "strong", (1,): "weak", (0, 1): "both"}[self.evaluators]
        buds = "all" if len(self.budgets) == _N_BUDGETS else "max"
        return f"win_chance:{evals}:{buds}"


def parse_selector(text: str) -> FeatureSelector:
    if text == "all":
        return FeatureSelector("all")
    if text == "is_best_move":
        return FeatureSelector("is_best_move")
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "win_chance":
        evals = {"strong": (0,), "weak": (1,), "both": (0, 1)}.get(parts[1])
        buds = {"max": (_N_BUDGETS - 1,),
                "all": tuple(range(_N_BUDGETS))}.get(parts[2])
        if evals is not None and buds is not None:
            return FeatureSelector("win_chance", evals, buds)
    raise ValueError(f"unknown feature selector {text!r}")


def selector_dim(selector: FeatureSelector) -> int:
    if selector.kind == "all":
        from ..features import DATUM_LEN
        return DATUM_LEN
    if selector.kind == "is_best_move":
        return NUM_BLOCKS
    return 3 * len(selector.evaluators) * len(selector.budgets)


def select_matrix(selector: FeatureSelector, X: np.ndarray) -> np.ndarray:
    """Apply the selector to an (n, 3980) matrix."""
    if selector.kind == "all":
        return X
    if selector.kind == "is_best_move":
        idx = [block_start(e, b) + IDX_IS_BEST
               for e in range(2) for b in range(_N_BUDGETS)]
        return X[:, idx]
    cols = []
    for e in selector.evaluators:
        for b in selector.budgets:
            base = block_start(e, b)
            parent_q = X[:, base + PARENT_OFF + SUB_IDX_Q]
            post_q = X[:, base + CHILD_OFF + SUB_IDX_Q]
            cols.extend([parent_q, post_q, post_q - parent_q])
    return np.stack(cols, axis=1)
