"""PUCT Monte-Carlo tree search over a pluggable evaluator.

The budget is the exact number of evaluator calls, the root's initial
evaluation included. Selection maximizes

    Q' + c_puct * P * sqrt(N_parent) / (1 + N_child)

where Q' is the child's mean value negated into the parent's perspective
and unvisited children use Q' = 0. Ties break by canonical move order.
Terminal nodes (checkmate -1, stalemate 0 for the side to move) are never
expanded; re-visiting one backs its value up again without consuming an
evaluator call. Everything is deterministic given (position, budget,
evaluator, seed); the seed only matters for stochastic evaluators.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .board import Move, Position, _apply_unchecked, in_check, legal_moves, parse_uci, to_fen

DEFAULT_C_PUCT = 1.5

# A search is declared exhausted when this many consecutive simulations
# back up terminal values without a single evaluator call; at that point
# the reachable tree cannot absorb the remaining budget.
_EXHAUST_SLACK = 256


class SearchExhaustedError(RuntimeError):
    pass


class _Node:
    __slots__ = ("position", "move", "prior", "visits", "value_sum",
                 "children", "terminal_value", "evaluated")

    def __init__(self, position: Optional[Position], move: Optional[Move],
                 prior: float):
        self.position = position
        self.move = move
        self.prior = prior
        self.visits = 0
        self.value_sum = 0.0
        self.children = None          # list[_Node] in canonical move order
        self.terminal_value = None    # -1.0 mate / 0.0 stalemate, else None
        self.evaluated = False


@dataclass(frozen=True)
class TreeNode:
    """Frozen search-tree node; only visited children are kept."""

    move: Optional[Move]
    prior: float
    visits: int
    value_sum: float
    terminal: bool
    children: tuple

    @property
    def q(self) -> float:
        return self.value_sum / self.visits


@dataclass(frozen=True)
class SearchTree:
    root: TreeNode
    root_position: Position
    budget: int
    evaluator_name: str
    seed: int
    c_puct: float
    eval_paths: tuple  # "/"-joined uci paths in evaluation order; "" = root

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children)
        return count


def _select_child(node: _Node, c_puct: float) -> _Node:
    sqrt_n = math.sqrt(node.visits)
    best = None
    best_score = -math.inf
    for child in node.children:
        if child.visits > 0:
            q = -(child.value_sum / child.visits)
        else:
            q = 0.0
        score = q + c_puct * child.prior * sqrt_n / (1 + child.visits)
        if score > best_score:
            best_score = score
            best = child
    return best


def _expand(node: _Node, policy: dict) -> None:
    moves = legal_moves(node.position)
    node.children = [_Node(None, m, policy.get(m, 0.0)) for m in moves]


def _backup(path: list, value: float) -> None:
    # `value` is from the perspective of the side to move at path[-1]
    for node in reversed(path):
        node.visits += 1
        node.value_sum += value
        value = -value


def _freeze(root: _Node) -> TreeNode:
    # iterative post-order so deep forced lines cannot overflow the stack
    frozen = {}
    stack = [(root, False)]
    while stack:
        node, ready = stack.pop()
        visited_kids = [c for c in (node.children or ()) if c.visits > 0]
        if not ready:
            stack.append((node, True))
            for child in visited_kids:
                stack.append((child, False))
            continue
        children = tuple(frozen.pop(id(c)) for c in visited_kids)
        frozen[id(node)] = TreeNode(
            move=node.move, prior=node.prior, visits=node.visits,
            value_sum=node.value_sum,
            terminal=node.terminal_value is not None,
            children=children)
    return frozen[id(root)]


def run_search_multi(p: Position, budgets, evaluator, seed: int = 0,
                     c_puct: float = DEFAULT_C_PUCT) -> list:
    """Run one search to max(budgets), snapshotting a SearchTree at each
    budget. Because selection is deterministic, each snapshot is exactly
    what a standalone search with that budget would produce."""
    budgets = sorted(set(budgets))
    if budgets[0] < 1:
        raise ValueError("budget must be >= 1")
    if not legal_moves(p):
        raise ValueError(f"cannot search a terminal position: {to_fen(p)}")

    root = _Node(p, None, 1.0)
    policy, value = evaluator.evaluate(p)
    _expand(root, policy)
    root.evaluated = True
    calls = 1
    eval_paths = [""]
    _backup([root], value)

    trees = []
    budget_iter = iter(budgets)
    next_budget = next(budget_iter)
    max_budget = budgets[-1]

    def snapshot(budget):
        trees.append(SearchTree(
            root=_freeze(root), root_position=p, budget=budget,
            evaluator_name=evaluator.name, seed=seed, c_puct=c_puct,
            eval_paths=tuple(eval_paths[:budget])))

    while calls >= next_budget:
        snapshot(next_budget)
        nxt = next(budget_iter, None)
        if nxt is None:
            return trees
        next_budget = nxt

    fruitless = 0
    while calls < max_budget:
        node = root
        path = [root]
        moves_taken = []
        while True:
            child = _select_child(node, c_puct)
            path.append(child)
            moves_taken.append(child.move)
            if child.visits == 0:
                position = _apply_unchecked(node.position, child.move)
                child.position = position
                if not legal_moves(position):
                    child.terminal_value = -1.0 if in_check(position) else 0.0
                    _backup(path, child.terminal_value)
                    fruitless += 1
                    break
                child_policy, child_value = evaluator.evaluate(position)
                _expand(child, child_policy)
                child.evaluated = True
                calls += 1
                eval_paths.append("/".join(m.uci() for m in moves_taken))
                _backup(path, child_value)
                fruitless = 0
                break
            if child.terminal_value is not None:
                _backup(path, child.terminal_value)
                fruitless += 1
                break
            node = child
        if fruitless > _EXHAUST_SLACK + 8 * max_budget:
            raise SearchExhaustedError(
                f"search from {to_fen(p)} cannot reach budget {max_budget}: "
                f"only {calls} non-terminal nodes reachable")
        while calls >= next_budget:
            snapshot(next_budget)
            nxt = next(budget_iter, None)
            if nxt is None:
                return trees
            next_budget = nxt
    return trees


def run_search(p: Position, budget: int, evaluator, seed: int = 0,
               c_puct: float = DEFAULT_C_PUCT) -> SearchTree:
    """PUCT search with exactly `budget` evaluator calls."""
    return run_search_multi(p, [budget], evaluator, seed=seed, c_puct=c_puct)[0]


# ---------------------------------------------------------------------------
# Dump format: JSON nodes [{id, parent_id, move_uci, prior, visits, q}],
# ids assigned in depth-first canonical order from the root.

def tree_to_dict(tree: SearchTree) -> dict:
    nodes = []
    stack = [(tree.root, None)]
    while stack:
        node, parent_id = stack.pop()
        node_id = len(nodes)
        nodes.append({
            "id": node_id,
            "parent_id": parent_id,
            "move_uci": node.move.uci() if node.move else None,
            "prior": node.prior,
            "visits": node.visits,
            "q": node.q,
        })
        for child in reversed(node.children):
            stack.append((child, node_id))
    return {
        "fen": to_fen(tree.root_position),
        "evaluator": tree.evaluator_name,
        "budget": tree.budget,
        "seed": tree.seed,
        "c_puct": tree.c_puct,
        "nodes": nodes,
    }


def tree_to_json(tree: SearchTree) -> str:
    return json.dumps(tree_to_dict(tree), sort_keys=True)


def tree_from_dict(payload: dict) -> SearchTree:
    from .board import parse_fen

    records = payload["nodes"]
    children_of = {}
    for rec in records:
        children_of.setdefault(rec["parent_id"], []).append(rec)

    # dump ids are depth-first pre-order, so children always have larger
    # ids than their parent and a reverse sweep builds leaves first
    built = {}
    for rec in sorted(records, key=lambda r: -r["id"]):
        kids = tuple(built[r["id"]] for r in children_of.get(rec["id"], ()))
        built[rec["id"]] = TreeNode(
            move=parse_uci(rec["move_uci"]) if rec["move_uci"] else None,
            prior=rec["prior"], visits=rec["visits"],
            value_sum=rec["q"] * rec["visits"],
            terminal=False, children=kids)

    root_rec = children_of[None][0]
    return SearchTree(
        root=built[root_rec["id"]], root_position=parse_fen(payload["fen"]),
        budget=payload["budget"], evaluator_name=payload["evaluator"],
        seed=payload["seed"], c_puct=payload["c_puct"], eval_paths=())
