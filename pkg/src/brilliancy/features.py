"""Fixed-length feature vectors from search trees: 22 per subtree, 398
per tree, 3980 per labeled move.

All win-chance values are expressed from the perspective of the player
to move at the parent board (the "mover"), so "advantage" always means
good for the player whose move is being classified. A node at odd depth
from the parent board has its Q negated into that perspective.

Canonical subtree layout (22 features):
    [0..3]   counts of increasing / advantage / decreasing / disadvantage
             children of the subtree root
    [4]      subtree root Q        [5]  max child Q (-1 if leaf)
    [6]      subtree root prior    [7]  subtree root visit count
    [8]      max child prior       [9]  max child visit count
    [10]     branching factor      [11..17] width at depths 1..7
    [18..20] mean / std / max width over depths 1..height
    [21]     height

Canonical tree layout (398 = 18*22 + 2 features):
    [0] move-in-tree flag, [1] best-move flag, [2..23] parent subtree,
    [24..45] post-move subtree, then mean/std/min/max aggregate blocks
    for the increasing, advantage, decreasing, disadvantage groups.

A datum concatenates 10 tree blocks: strong evaluator then weak, budgets
ascending within each. Missing subtrees and empty groups contribute the
fill vector (zeros, with the two Q features at -1).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .board import Move
from .mcts import SearchTree, TreeNode

SUBTREE_LEN = 22
TREE_LEN = 398
NUM_BLOCKS = 10
DATUM_LEN = NUM_BLOCKS * TREE_LEN
KEY_LEN = 46  # two flags + parent and post-move subtree features

IDX_CONTAINS = 0
IDX_IS_BEST = 1
PARENT_OFF = 2
CHILD_OFF = 24
GROUPS_OFF = 46

SUB_IDX_Q = 4
SUB_IDX_MAX_Q = 5
SUB_IDX_PRIOR = 6
SUB_IDX_VISITS = 7

GROUP_ORDER = ("increasing", "advantage", "decreasing", "disadvantage")
AGG_ORDER = ("mean", "std", "min", "max")

DEFAULT_BUDGETS = (10, 100, 1_000, 10_000, 100_000)
DEFAULT_EVALUATOR_ORDER = ("strong", "weak")


def fill_vector() -> np.ndarray:
    v = np.zeros(SUBTREE_LEN)
    v[SUB_IDX_Q] = -1.0
    v[SUB_IDX_MAX_Q] = -1.0
    return v


@dataclass(frozen=True)
class MoveTypeClassification:
    """Root-child moves split by the dQ / Q rules, move of interest
    excluded. Only visited children are classified."""

    q_root: float
    moves: tuple          # (move, q_mover, dq) per classified child
    increasing: tuple
    advantage: tuple
    decreasing: tuple
    disadvantage: tuple


def classify_root_moves(tree: SearchTree,
                        move_of_interest: Optional[Move]) -> MoveTypeClassification:
    q_root = tree.root.q  # root is the parent board: already mover-relative
    rows = []
    for child in tree.root.children:
        if child.move == move_of_interest:
            continue
        q_mover = -child.q
        rows.append((child.move, q_mover, q_mover - q_root))
    return MoveTypeClassification(
        q_root=q_root,
        moves=tuple(rows),
        increasing=tuple(m for m, q, dq in rows if dq > 0),
        advantage=tuple(m for m, q, dq in rows if q > 0),
        decreasing=tuple(m for m, q, dq in rows if dq <= 0),
        disadvantage=tuple(m for m, q, dq in rows if q <= 0),
    )


def _levels(node: TreeNode) -> list:
    """Node counts per depth below `node` (index 0 = the node itself)."""
    widths = [1]
    frontier = list(node.children)
    while frontier:
        widths.append(len(frontier))
        frontier = [c for parent in frontier for c in parent.children]
    return widths


def subtree_features(node: TreeNode, mover_sign: int) -> np.ndarray:
    """22 features for the subtree rooted at `node`. `mover_sign` is +1
    when the node's side to move equals the parent board's, else -1."""
    out = np.zeros(SUBTREE_LEN)
    q_here = mover_sign * node.q
    child_sign = -mover_sign

    n_inc = n_adv = n_dec = n_dis = 0
    max_q = None
    for child in node.children:
        q_child = child_sign * child.q
        dq = q_child - q_here
        if dq > 0:
            n_inc += 1
        else:
            n_dec += 1
        if q_child > 0:
            n_adv += 1
        else:
            n_dis += 1
        if max_q is None or q_child > max_q:
            max_q = q_child
    out[0], out[1], out[2], out[3] = n_inc, n_adv, n_dec, n_dis
    out[SUB_IDX_Q] = q_here
    out[SUB_IDX_MAX_Q] = max_q if max_q is not None else -1.0
    out[SUB_IDX_PRIOR] = node.prior
    out[SUB_IDX_VISITS] = node.visits
    out[8] = max((c.prior for c in node.children), default=0.0)
    out[9] = max((c.visits for c in node.children), default=0)

    widths = _levels(node)[1:]  # depth 1 onward
    height = len(widths)
    node_count = 1 + sum(widths)
    internal = _internal_count(node)
    out[10] = (node_count - 1) / internal if internal else 0.0
    for d in range(min(height, 7)):
        out[11 + d] = widths[d]
    if height:
        arr = np.asarray(widths, dtype=float)
        out[18] = np.mean(arr)
        out[19] = np.std(arr)
        out[20] = np.max(arr)
    out[21] = height
    return out


def _internal_count(node: TreeNode) -> int:
    count = 0
    stack = [node]
    while stack:
        n = stack.pop()
        if n.children:
            count += 1
            stack.extend(n.children)
    return count


def tree_features(tree: SearchTree, move_of_interest: Move) -> np.ndarray:
    """398 features for one search tree and the move being classified."""
    out = np.zeros(TREE_LEN)
    root = tree.root

    moi_node = None
    for child in root.children:
        if child.move == move_of_interest:
            moi_node = child
            break

    out[IDX_CONTAINS] = 1.0 if moi_node is not None else 0.0
    if moi_node is not None:
        best = _best_root_child(root)
        out[IDX_IS_BEST] = 1.0 if best is moi_node else 0.0

    out[PARENT_OFF:PARENT_OFF + SUBTREE_LEN] = subtree_features(root, +1)
    if moi_node is not None:
        out[CHILD_OFF:CHILD_OFF + SUBTREE_LEN] = subtree_features(moi_node, -1)
    else:
        out[CHILD_OFF:CHILD_OFF + SUBTREE_LEN] = fill_vector()

    q_root = root.q
    groups = {name: [] for name in GROUP_ORDER}
    for child in root.children:
        if child is moi_node:
            continue
        q_child = -child.q
        dq = q_child - q_root
        vec = subtree_features(child, -1)
        groups["increasing" if dq > 0 else "decreasing"].append(vec)
        groups["advantage" if q_child > 0 else "disadvantage"].append(vec)

    offset = GROUPS_OFF
    fill = fill_vector()
    for name in GROUP_ORDER:
        members = groups[name]
        if members:
            stacked = np.stack(members)
            aggs = (np.mean(stacked, axis=0), np.std(stacked, axis=0),
                    np.min(stacked, axis=0), np.max(stacked, axis=0))
        else:
            aggs = (fill, fill, fill, fill)
        for agg in aggs:
            out[offset:offset + SUBTREE_LEN] = agg
            offset += SUBTREE_LEN
    assert offset == TREE_LEN
    return out


def _best_root_child(root: TreeNode) -> Optional[TreeNode]:
    """Highest mover-perspective Q; ties by visit count, then by the
    canonical child order (children are stored in it)."""
    best = None
    best_key = None
    for child in root.children:
        key = (-child.q, child.visits)
        if best_key is None or key > best_key:
            best = child
            best_key = key
    return best


@dataclass(frozen=True)
class DatumFeatures:
    values: np.ndarray            # (3980,)
    label: Optional[str]
    evaluator_order: tuple
    budgets: tuple
    provenance: dict

    def __post_init__(self):
        assert self.values.shape == (DATUM_LEN,)


def datum_features(trees, move_of_interest: Move, label: Optional[str] = None,
                   evaluator_order: tuple = DEFAULT_EVALUATOR_ORDER,
                   provenance: Optional[dict] = None) -> DatumFeatures:
    """Concatenate the 10 tree blocks in canonical order. The trees may
    arrive in any order; they must cover evaluator_order x 5 budgets."""
    by_key = {}
    budgets = set()
    for tree in trees:
        key = (tree.evaluator_name, tree.budget)
        if key in by_key:
            raise ValueError(f"duplicate block ({key[0]}, {key[1]})")
        by_key[key] = tree
        budgets.add(tree.budget)

    budgets = tuple(sorted(budgets))
    if len(budgets) != NUM_BLOCKS // len(evaluator_order):
        raise ValueError(
            f"expected {NUM_BLOCKS // len(evaluator_order)} distinct budgets, "
            f"got {budgets}")
    for name in evaluator_order:
        for budget in budgets:
            if (name, budget) not in by_key:
                raise ValueError(f"missing block ({name}, {budget})")
    if len(by_key) != NUM_BLOCKS:
        extra = set(by_key) - {(n, b) for n in evaluator_order for b in budgets}
        raise ValueError(f"unexpected blocks {sorted(extra)}")

    blocks = []
    for name in evaluator_order:
        for budget in budgets:
            blocks.append(tree_features(by_key[(name, budget)], move_of_interest))
    values = np.concatenate(blocks)
    return DatumFeatures(values=values, label=label,
                         evaluator_order=tuple(evaluator_order),
                         budgets=budgets, provenance=provenance or {})


def block_slice(evaluator_index: int, budget_index: int) -> slice:
    start = (evaluator_index * (NUM_BLOCKS // 2) + budget_index) * TREE_LEN
    return slice(start, start + TREE_LEN)


def block_start(evaluator_index: int, budget_index: int) -> int:
    return (evaluator_index * (NUM_BLOCKS // 2) + budget_index) * TREE_LEN


# Raw indices of the post-move root-Q feature in the five weak-evaluator
# blocks; the perturbation study rewrites exactly these.
WEAK_POST_Q_INDICES = tuple(
    block_start(1, j) + CHILD_OFF + SUB_IDX_Q for j in range(NUM_BLOCKS // 2))


# ---------------------------------------------------------------------------
# Feature matrix persistence: flat little-endian float32 + JSON sidecar.

def save_feature_matrix(path, matrix: np.ndarray, rows: list,
                        evaluator_order, budgets, eval_config_hash: str) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2 or matrix.shape[1] != DATUM_LEN:
        raise ValueError(f"feature matrix must be (n, {DATUM_LEN})")
    matrix.tofile(str(path))
    sidecar = {
        "n_rows": int(matrix.shape[0]),
        "n_cols": DATUM_LEN,
        "dtype": "<f4",
        "evaluator_order": list(evaluator_order),
        "budgets": [int(b) for b in budgets],
        "eval_config_hash": eval_config_hash,
        "rows": rows,
    }
    with open(_sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def load_feature_matrix(path):
    with open(_sidecar_path(path)) as fh:
        sidecar = json.load(fh)
    matrix = np.fromfile(str(path), dtype="<f4")
    n = sidecar["n_rows"]
    if matrix.size != n * DATUM_LEN:
        raise ValueError(f"feature file size mismatch: {matrix.size} values "
                         f"for {n} rows")
    return matrix.reshape(n, DATUM_LEN).astype(np.float64), sidecar


def _sidecar_path(path) -> str:
    return str(path) + ".json"


def matrix_content_hash(matrix: np.ndarray) -> str:
    return hashlib.sha256(
        np.ascontiguousarray(matrix, dtype="<f4").tobytes()).hexdigest()
