"""Naive reference extractor for the 22/398/3980 feature layout.

Re-derives every feature with its own traversals (recursive depth maps,
explicit scans) instead of the library's level-walk, so a bug in either
implementation shows up as a mismatch. Reductions use the same numpy
primitives in the same member order, which keeps agreement bit-exact.
"""
import numpy as np

FILL = np.zeros(22)
FILL[4] = FILL[5] = -1.0


def node_q(node):
    return node.value_sum / node.visits


def collect_depths(node, depth=0, acc=None):
    if acc is None:
        acc = []
    acc.append(depth)
    for child in node.children:
        collect_depths(child, depth + 1, acc)
    return acc


def ref_subtree(node, sign):
    q_here = sign * node_q(node)
    children = list(node.children)

    increasing = advantage = decreasing = disadvantage = 0
    child_qs = []
    for child in children:
        qc = -sign * node_q(child)
        child_qs.append(qc)
        if qc - q_here > 0:
            increasing += 1
        if qc > 0:
            advantage += 1
        if qc - q_here <= 0:
            decreasing += 1
        if qc <= 0:
            disadvantage += 1

    depths = collect_depths(node)
    height = max(depths)
    widths = [sum(1 for d in depths if d == k) for k in range(1, height + 1)]

    def count_internal(n):
        return (1 if n.children else 0) + sum(count_internal(c) for c in n.children)

    internal = count_internal(node)
    total = len(depths)

    out = np.zeros(22)
    out[0] = increasing
    out[1] = advantage
    out[2] = decreasing
    out[3] = disadvantage
    out[4] = q_here
    out[5] = max(child_qs) if child_qs else -1.0
    out[6] = node.prior
    out[7] = node.visits
    out[8] = max([c.prior for c in children], default=0.0)
    out[9] = max([c.visits for c in children], default=0)
    out[10] = (total - 1) / internal if internal else 0.0
    for d in range(1, 8):
        out[10 + d] = widths[d - 1] if d <= height else 0.0
    if widths:
        warr = np.asarray(widths, dtype=float)
        out[18] = np.mean(warr)
        out[19] = np.std(warr)
        out[20] = np.max(warr)
    out[21] = height
    return out


def ref_tree(tree, move_of_interest):
    root = tree.root
    children = list(root.children)

    moi = None
    for child in children:
        if child.move == move_of_interest:
            moi = child

    contains = 1.0 if moi is not None else 0.0
    is_best = 0.0
    if moi is not None:
        # best = max (q, visits), earliest child wins ties
        keys = [(-node_q(c), c.visits) for c in children]
        best_index = 0
        for i in range(1, len(keys)):
            if keys[i] > keys[best_index]:
                best_index = i
        if children[best_index] is moi:
            is_best = 1.0

    parts = [np.array([contains, is_best]), ref_subtree(root, +1)]
    parts.append(ref_subtree(moi, -1) if moi is not None else FILL.copy())

    q_root = node_q(root)
    member_lists = {"increasing": [], "advantage": [],
                    "decreasing": [], "disadvantage": []}
    for child in children:
        if child is moi:
            continue
        qc = -node_q(child)
        vec = ref_subtree(child, -1)
        if qc - q_root > 0:
            member_lists["increasing"].append(vec)
        if qc > 0:
            member_lists["advantage"].append(vec)
        if qc - q_root <= 0:
            member_lists["decreasing"].append(vec)
        if qc <= 0:
            member_lists["disadvantage"].append(vec)

    for name in ("increasing", "advantage", "decreasing", "disadvantage"):
        members = member_lists[name]
        if not members:
            for _ in range(4):
                parts.append(FILL.copy())
            continue
        stacked = np.stack(members)
        parts.append(np.mean(stacked, axis=0))
        parts.append(np.std(stacked, axis=0))
        parts.append(np.min(stacked, axis=0))
        parts.append(np.max(stacked, axis=0))

    out = np.concatenate(parts)
    assert out.shape == (398,)
    return out


def ref_datum(trees, move_of_interest, evaluator_order, budgets):
    lookup = {(t.evaluator_name, t.budget): t for t in trees}
    parts = []
    for name in evaluator_order:
        for budget in budgets:
            parts.append(ref_tree(lookup[(name, budget)], move_of_interest))
    return np.concatenate(parts)
