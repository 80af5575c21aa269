"""Built-in policy/value evaluators standing in for the two engine
strengths: a "strong" profile with positional terms and a 2-ply lookahead,
and a "weak" material-only profile biased toward captures.

Both are deterministic. evaluate() returns (policy, value): a probability
per legal move summing to 1, and a value in [-1, 1] from the side to
move's perspective. Terminal positions must not be passed in.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import Protocol

from .board import (
    PIECE_VALUES_CP, Position, _apply_unchecked, has_any_legal_move, in_check,
    legal_moves, pawn_shield, piece_kind, pseudo_mobility,
)

MATE_CP = 100_000

# Child scores fed to the policy softmax are clamped so that mate-in-one
# lines do not underflow every other prior to exactly zero (a zero prior
# can never be explored by PUCT).
POLICY_CLAMP_CP = 1_500.0


@dataclass(frozen=True)
class EvalWeights:
    """Term weights for the built-in evaluators. Versioned so feature files
    and checkpoints can record exactly which profile produced them."""

    version: str = "default-1"
    mobility_cp: float = 2.0        # cp per pseudo-legal move of difference
    king_shield_cp: float = 12.0    # cp per shield pawn of difference
    tanh_scale: float = 0.0025      # value = tanh(tanh_scale * score_cp)
    tau_strong_cp: float = 60.0     # softmax temperature, strong policy
    tau_weak_cp: float = 120.0      # softmax temperature, weak policy
    capture_bias_cp: float = 50.0   # added to captures in the weak policy

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


class Evaluator(Protocol):
    name: str
    deterministic: bool

    def evaluate(self, p: Position) -> tuple:  # (dict[Move, float], float)
        ...


def _material_stm(p: Position) -> int:
    return p.material_cp if p.turn == 0 else -p.material_cp


def _softmax(scores, tau):
    scores = [min(max(s, -POLICY_CLAMP_CP), POLICY_CLAMP_CP) for s in scores]
    top = max(scores)
    exps = [math.exp((s - top) / tau) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def _capture_gain_cp(p: Position, m) -> int:
    """Material swing of the move itself: victim value plus promotion gain."""
    target = p.board[m.to_sq]
    gain = PIECE_VALUES_CP[piece_kind(target)] if target else 0
    if gain == 0 and p.ep is not None and m.to_sq == p.ep \
            and piece_kind(p.board[m.from_sq]) == 1:
        gain = 100  # en passant
    if m.promo:
        gain += PIECE_VALUES_CP[m.promo] - 100
    return gain


class WeakEvaluator:
    """Material-only value, capture-hungry policy, no lookahead."""

    deterministic = True

    def __init__(self, weights: EvalWeights = EvalWeights(), name: str = "weak"):
        self.weights = weights
        self.name = name

    def evaluate(self, p: Position):
        moves = legal_moves(p)
        if not moves:
            raise ValueError("terminal position passed to evaluator")
        w = self.weights
        value = math.tanh(w.tanh_scale * _material_stm(p))
        scores = [_capture_gain_cp(p, m) +
                  (w.capture_bias_cp if _capture_gain_cp(p, m) > 0 else 0.0)
                  for m in moves]
        probs = _softmax(scores, w.tau_weak_cp)
        return dict(zip(moves, probs)), value


class StrongEvaluator:
    """Material + mobility + king-safety value refined by a 2-ply negamax;
    policy from 1-ply child scores."""

    deterministic = True

    def __init__(self, weights: EvalWeights = EvalWeights(), name: str = "strong",
                 lookahead: int = 2):
        self.weights = weights
        self.name = name
        self.lookahead = lookahead
        self._static_cache: dict = {}

    def _static_cp(self, p: Position) -> float:
        cached = self._static_cache.get(p)
        if cached is not None:
            return cached
        w = self.weights
        mob = pseudo_mobility(p, p.turn) - pseudo_mobility(p, p.turn ^ 1)
        shield = pawn_shield(p, p.turn) - pawn_shield(p, p.turn ^ 1)
        score = _material_stm(p) + w.mobility_cp * mob + w.king_shield_cp * shield
        if len(self._static_cache) > 400_000:
            self._static_cache.clear()
        self._static_cache[p] = score
        return score

    def _negamax(self, p: Position, depth: int, alpha: float, beta: float) -> float:
        if depth == 0:
            if not has_any_legal_move(p):
                return -MATE_CP if in_check(p) else 0.0
            return self._static_cp(p)
        moves = legal_moves(p)
        if not moves:
            # prefer faster mates so the refined score stays deterministic
            return -MATE_CP - depth if in_check(p) else 0.0
        # captures first: cheap ordering that only affects pruning speed
        ordered = sorted(moves, key=lambda m: -_capture_gain_cp(p, m))
        best = -math.inf
        for m in ordered:
            v = -self._negamax(_apply_unchecked(p, m), depth - 1, -beta, -alpha)
            if v > best:
                best = v
            if best > alpha:
                alpha = best
            if alpha >= beta:
                break
        return best

    def evaluate(self, p: Position):
        moves = legal_moves(p)
        if not moves:
            raise ValueError("terminal position passed to evaluator")
        w = self.weights
        refined = self._negamax(p, self.lookahead, -math.inf, math.inf)
        value = math.tanh(w.tanh_scale * refined)

        scores = []
        for m in moves:
            child = _apply_unchecked(p, m)
            if not has_any_legal_move(child):
                score = MATE_CP if in_check(child) else 0.0
            else:
                score = -self._static_cp(child)
            scores.append(score)
        probs = _softmax(scores, w.tau_strong_cp)
        return dict(zip(moves, probs)), value


def strong_eval(weights: EvalWeights = EvalWeights()) -> StrongEvaluator:
    return StrongEvaluator(weights)


def weak_eval(weights: EvalWeights = EvalWeights()) -> WeakEvaluator:
    return WeakEvaluator(weights)


def make_evaluator(name: str, weights: EvalWeights = EvalWeights()):
    if name == "strong":
        return strong_eval(weights)
    if name == "weak":
        return weak_eval(weights)
    raise ValueError(f"unknown evaluator {name!r}")
