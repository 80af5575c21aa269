"""Synthetic labeled positions with a controllable brilliance signal.

Brilliant data come from a deflection template: a white rook steps onto
the back rank next to a black rook that blockades a passed pawn one step
from promotion. Capturing the intruder walks into a pawn-capture
promotion; declining loses the blockade. The payoff sits two plies past
the move of interest, so the material-only weak evaluator scores the
line badly at small search budgets while the lookahead evaluator finds
the move at once. Controls are plain good captures and quiet shuffles on
similar boards.

Every candidate is verified against the actual search pipeline before it
enters the dataset, and the verified trees are reused for its feature
row. Searches here use a wider exploration constant than the pipeline
default so small budgets still cover the root moves; the constant is
recorded in the trees as usual.
"""
from __future__ import annotations

import multiprocessing
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .board import (
    BLACK, KING, PAWN, ROOK, WHITE, Move, Position, legal_moves, parse_fen,
    to_fen,
)
from .evaluation import EvalWeights, strong_eval, weak_eval
from .features import (
    CHILD_OFF, IDX_CONTAINS, IDX_IS_BEST, SUB_IDX_Q, block_start,
    datum_features,
)
from .mcts import SearchExhaustedError, run_search_multi

DEFAULT_SYNTH_BUDGETS = (1, 2, 4, 8, 32)
SYNTH_C_PUCT = 3.5


@dataclass(frozen=True)
class SyntheticDatum:
    fen: str
    uci: str
    label: str
    features: np.ndarray


def _sq(file: int, rank: int) -> int:
    """0-based file and rank."""
    return rank * 8 + file


def _piece(kind: int, color: int) -> int:
    return kind + (6 if color == BLACK else 0)


def _build_position(pieces: dict, turn=WHITE) -> Optional[Position]:
    board = bytearray(64)
    for sq, code in pieces.items():
        if board[sq]:
            return None
        board[sq] = code
    candidate = Position(bytes(board), turn, 0, None, 0, 30)
    try:
        return parse_fen(to_fen(candidate))
    except ValueError:
        return None


def _kings_and_shelter(rng, pieces: dict) -> None:
    wk = rng.choice((6, 7))
    bk = rng.choice((6, 7))
    pieces[_sq(wk, 0)] = _piece(KING, WHITE)
    pieces[_sq(bk, 7)] = _piece(KING, BLACK)
    for f in rng.sample((5, 6, 7), 2):
        pieces.setdefault(_sq(f, 1), _piece(PAWN, WHITE))
    for f in rng.sample((5, 6, 7), 2):
        pieces.setdefault(_sq(f, 6), _piece(PAWN, BLACK))


def brilliant_candidate(rng) -> Optional[tuple]:
    """Deflection-promotion position; the move of interest is the rook
    lift to the back rank next to the blockader."""
    promo_file = rng.choice((1, 2, 3))          # b, c, or d
    land_file = promo_file + 1
    rook_rank = rng.choice((0, 1, 2))
    pieces = {
        _sq(promo_file, 6): _piece(PAWN, WHITE),          # one step from in
        _sq(promo_file, 7): _piece(ROOK, BLACK),          # the blockader
        _sq(land_file, rook_rank): _piece(ROOK, WHITE),   # the deflector
        _sq(promo_file - 1, 5): _piece(PAWN, WHITE),      # guards the pawn
    }
    _kings_and_shelter(rng, pieces)
    # white's extra structure is balanced by black queenside pawns
    for r in (4, 5):
        if rng.random() < 0.9:
            pieces.setdefault(_sq(0 if rng.random() < 0.7 else 1, r),
                              _piece(PAWN, BLACK))
    pos = _build_position(pieces)
    if pos is None:
        return None
    move = Move(_sq(land_file, rook_rank), _sq(land_file, 7))
    if move not in legal_moves(pos):
        return None
    return pos, move, "brilliant"


def capture_candidate(rng) -> Optional[tuple]:
    """A white rook grabs an undefended pawn: obviously good, no hidden
    depth."""
    target_file = rng.choice((1, 2, 3))
    target_rank = rng.choice((4, 5))
    rook_rank = rng.choice((0, 1, 2))
    pieces = {
        _sq(target_file, target_rank): _piece(PAWN, BLACK),
        _sq(target_file, rook_rank): _piece(ROOK, WHITE),
        _sq((target_file + 2) % 8, 6): _piece(ROOK, BLACK),
    }
    _kings_and_shelter(rng, pieces)
    if rng.random() < 0.5:
        pieces.setdefault(_sq(0, rng.choice((3, 4))), _piece(PAWN, WHITE))
    pos = _build_position(pieces)
    if pos is None:
        return None
    move = Move(_sq(target_file, rook_rank), _sq(target_file, target_rank))
    if move not in legal_moves(pos):
        return None
    return pos, move, "good"


def quiet_candidate(rng) -> Optional[tuple]:
    """Balanced rook endgame; the move of interest is a rook slide along
    its own rank."""
    rook_file = rng.choice((0, 1, 2, 3))
    rook_rank = rng.choice((1, 2))
    pieces = {
        _sq(rook_file, rook_rank): _piece(ROOK, WHITE),
        _sq(rng.choice((3, 4)), 6): _piece(ROOK, BLACK),
    }
    _kings_and_shelter(rng, pieces)
    pos = _build_position(pieces)
    if pos is None:
        return None
    move = Move(_sq(rook_file, rook_rank),
                _sq(rook_file + rng.choice((1, 2)), rook_rank))
    if move not in legal_moves(pos):
        return None
    return pos, move, "other"


def _verify_brilliant(values: np.ndarray, budgets) -> bool:
    top = len(budgets) - 1
    strong_top = block_start(0, top)
    if values[strong_top + IDX_CONTAINS] != 1.0:
        return False
    if values[strong_top + IDX_IS_BEST] != 1.0:
        return False
    if values[strong_top + CHILD_OFF + SUB_IDX_Q] < 0.25:
        return False
    # undervalued (or unseen) by the weak evaluator at the two smallest
    # budgets; the fill value -1 counts as undervalued
    for b in (0, 1):
        weak_block = block_start(1, b)
        if values[weak_block + CHILD_OFF + SUB_IDX_Q] > 0.05:
            return False
    return True


def _verify_capture(values: np.ndarray, budgets) -> bool:
    top = len(budgets) - 1
    for e in (0, 1):
        block = block_start(e, top)
        if values[block + IDX_CONTAINS] != 1.0:
            return False
        if values[block + CHILD_OFF + SUB_IDX_Q] < 0.0:
            return False
    return True


_TEMPLATES = {
    "brilliant": (brilliant_candidate, _verify_brilliant),
    "good": (capture_candidate, _verify_capture),
    "other": (quiet_candidate, None),
}


def _make_row(args) -> Optional[SyntheticDatum]:
    label, cand_seed, budgets, weights, c_puct = args
    make, verify = _TEMPLATES[label]
    rng = random.Random(cand_seed)
    candidate = make(rng)
    if candidate is None:
        return None
    pos, move, row_label = candidate
    evaluators = (strong_eval(weights), weak_eval(weights))
    trees = []
    try:
        for ev in evaluators:
            trees.extend(run_search_multi(pos, budgets, ev, seed=0,
                                          c_puct=c_puct))
    except (SearchExhaustedError, ValueError):
        return None
    datum = datum_features(trees, move, label=row_label)
    if verify is not None and not verify(datum.values, budgets):
        return None
    return SyntheticDatum(fen=to_fen(pos), uci=move.uci(), label=row_label,
                          features=datum.values)


def generate_dataset(n_brilliant: int, n_control: int, seed: int = 0,
                     budgets=DEFAULT_SYNTH_BUDGETS,
                     weights: EvalWeights = EvalWeights(),
                     c_puct: float = SYNTH_C_PUCT,
                     workers: int = 1,
                     max_attempts_factor: int = 60):
    """Verified synthetic dataset.

    Returns (X, labels, meta) with X of shape
    (n_brilliant + n_control, 3980). Controls split evenly between good
    captures and quiet moves. Candidate seeds derive from `seed` and
    accepted rows are collected in seed order, so the result does not
    depend on `workers`.
    """
    budgets = tuple(sorted(budgets))
    plan = [("brilliant", n_brilliant),
            ("good", n_control - n_control // 2),
            ("other", n_control // 2)]

    rows = []
    pool = multiprocessing.Pool(workers) if workers > 1 else None
    try:
        for label, wanted in plan:
            label_id = {"brilliant": 1, "good": 2, "other": 3}[label]
            base = ((seed * 1000003 + label_id) & 0x7FFFFFFF) << 20
            cap = max_attempts_factor * max(wanted, 1)
            wave = max(32, 16 * workers)
            produced = 0
            next_seed = 0
            # bounded waves keep workers from churning stale candidates
            # after the quota is met; acceptance follows seed order, so
            # the output is identical for any worker count
            while produced < wanted and next_seed < cap:
                batch = [(label, base + j, budgets, weights, c_puct)
                         for j in range(next_seed, min(next_seed + wave, cap))]
                next_seed += len(batch)
                results = pool.map(_make_row, batch) if pool \
                    else [_make_row(a) for a in batch]
                for row in results:
                    if row is not None and produced < wanted:
                        rows.append(row)
                        produced += 1
            if produced < wanted:
                raise RuntimeError(
                    f"could not generate {wanted} {label} rows")
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()

    random.Random(seed).shuffle(rows)
    X = np.stack([r.features for r in rows])
    labels = [r.label for r in rows]
    meta = [{"fen": r.fen, "uci": r.uci, "label": r.label} for r in rows]
    return X, labels, meta
