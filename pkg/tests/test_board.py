import random

import pytest
from hypothesis import given, settings, strategies as st

from brilliancy import board as B
from brilliancy.board import (
    FenError, Move, MoveError, apply_move, legal_moves, parse_fen, parse_san,
    parse_uci, startpos, to_fen,
)

from oracle_board import legal_move_set

KIWIPETE = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1"


def perft(pos, depth):
    moves = legal_moves(pos)
    if depth == 1:
        return len(moves)
    total = 0
    for m in moves:
        total += perft(apply_move(pos, m), depth - 1)
    return total


def random_playout(seed, plies):
    """Deterministic pseudo-random position reached from the start position."""
    rng = random.Random(seed)
    pos = startpos()
    for _ in range(plies):
        moves = legal_moves(pos)
        if not moves:
            break
        nxt = apply_move(pos, rng.choice(moves))
        if not legal_moves(nxt):
            break
        pos = nxt
    return pos


class TestFen:
    def test_startpos(self):
        pos = startpos()
        assert sum(1 for c in pos.board if c) == 32
        assert pos.turn == B.WHITE
        assert pos.fullmove == 1

    def test_two_kings_minimal(self):
        pos = parse_fen("8/8/8/8/8/8/8/K6k w - - 0 1")
        assert sum(1 for c in pos.board if c) == 2

    def test_round_trip(self):
        for fen in (B.STARTPOS_FEN, KIWIPETE,
                    "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
                    "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8"):
            assert to_fen(parse_fen(fen)) == fen

    def test_two_white_kings_rejected(self):
        with pytest.raises(FenError, match="invariant: king count"):
            parse_fen("8/8/8/8/8/8/8/KK5k w - - 0 1")

    def test_bad_field_count(self):
        with pytest.raises(FenError, match="6 FEN fields"):
            parse_fen("8/8/8/8/8/8/8/K6k w -")

    def test_bad_piece_char(self):
        with pytest.raises(FenError, match="illegal piece"):
            parse_fen("8/8/8/8/8/8/8/X6k w - - 0 1")

    def test_side_not_to_move_in_check(self):
        # white king attacked while black is to move
        with pytest.raises(FenError, match="side not to move"):
            parse_fen("7k/8/8/8/8/8/8/Kr6 b - - 0 1")

    def test_ep_square_rank(self):
        with pytest.raises(FenError, match="en passant"):
            parse_fen("7k/8/8/8/8/8/8/K7 w - e4 0 1")


class TestMoveGen:
    def test_startpos_20(self):
        assert len(legal_moves(startpos())) == 20

    def test_kiwipete_48(self):
        assert len(legal_moves(parse_fen(KIWIPETE))) == 48

    def test_stalemate_empty(self):
        pos = parse_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1")
        assert legal_moves(pos) == []
        assert B.is_stalemate(pos)

    def test_checkmate(self):
        pos = parse_fen("7k/6Q1/6K1/8/8/8/8/8 b - - 0 1")
        assert B.is_checkmate(pos)

    def test_canonical_order(self):
        moves = legal_moves(startpos())
        assert moves == sorted(moves)

    def test_oracle_agreement_on_playouts(self):
        for seed in range(40):
            pos = random_playout(seed, seed % 24)
            got = {m.uci() for m in legal_moves(pos)}
            assert got == legal_move_set(to_fen(pos)), to_fen(pos)

    def test_oracle_agreement_tricky(self):
        tricky = [
            KIWIPETE,
            "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
            "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
            "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
            "r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10",
            # en passant pin: exd6 would expose the king to the rook
            "8/8/8/K2pP2r/8/8/8/7k w - d6 0 1",
            # en passant available and legal
            "8/8/8/3pP3/8/8/8/K6k w - d6 0 1",
            # promotions with captures
            "1n2k3/P7/8/8/8/8/7p/4K1N1 w - - 0 1",
            "1n2k3/P7/8/8/8/8/7p/4K1N1 b - - 0 1",
            # castling through attacked square forbidden
            "4k3/8/8/8/8/5q2/8/R3K2R w KQ - 0 1",
        ]
        for fen in tricky:
            pos = parse_fen(fen)
            got = {m.uci() for m in legal_moves(pos)}
            assert got == legal_move_set(fen), fen


class TestApplyMove:
    def test_e4_sets_ep(self):
        pos = apply_move(startpos(), parse_uci("e2e4"))
        assert pos.turn == B.BLACK
        assert pos.ep == B.parse_square("e3")
        assert pos.halfmove == 0

    def test_castling_moves_rook(self):
        pos = parse_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1")
        after = apply_move(pos, parse_uci("e1g1"))
        assert after.piece_at(B.parse_square("g1")) == B.KING
        assert after.piece_at(B.parse_square("f1")) == B.ROOK
        assert after.castling & (B.CASTLE_WK | B.CASTLE_WQ) == 0

    def test_en_passant_removes_pawn(self):
        pos = parse_fen("8/8/8/3pP3/8/8/8/K6k w - d6 0 1")
        after = apply_move(pos, parse_uci("e5d6"))
        assert after.piece_at(B.parse_square("d5")) == B.EMPTY
        assert after.piece_at(B.parse_square("d6")) == B.PAWN

    def test_promotion(self):
        pos = parse_fen("8/P7/8/8/8/8/8/K6k w - - 0 1")
        after = apply_move(pos, parse_uci("a7a8q"))
        assert after.piece_at(B.parse_square("a8")) == B.QUEEN
        assert after.material_cp == pos.material_cp + 800

    def test_illegal_move_rejected(self):
        with pytest.raises(MoveError, match="illegal move e2e5"):
            apply_move(startpos(), parse_uci("e2e5"))

    def test_perft_startpos(self):
        pos = startpos()
        assert perft(pos, 1) == 20
        assert perft(pos, 2) == 400
        assert perft(pos, 3) == 8902

    def test_fullmove_counter(self):
        pos = apply_move(startpos(), parse_uci("e2e4"))
        assert pos.fullmove == 1
        pos = apply_move(pos, parse_uci("e7e5"))
        assert pos.fullmove == 2


class TestSan:
    def test_simple_pawn_push(self):
        assert parse_san(startpos(), "e4") == parse_uci("e2e4")

    def test_disambiguation_by_file(self):
        # two knights can reach the empty d2 square: b1 and f3
        pos = parse_fen("rnbqkbnr/pppppppp/8/8/3P4/5N2/PPP1PPPP/RNBQKB1R w KQkq - 0 1")
        assert parse_san(pos, "Nbd2") == parse_uci("b1d2")
        assert parse_san(pos, "Nfd2") == parse_uci("f3d2")
        with pytest.raises(MoveError, match="ambiguous"):
            parse_san(pos, "Nd2")

    def test_no_match(self):
        with pytest.raises(MoveError, match="no matching legal move"):
            parse_san(startpos(), "Ke2")

    def test_suffixes_stripped(self):
        assert parse_san(startpos(), "e4!!") == parse_uci("e2e4")
        assert parse_san(startpos(), "Nf3?!") == parse_uci("g1f3")

    def test_castling_tokens(self):
        pos = parse_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1")
        assert parse_san(pos, "O-O") == parse_uci("e1g1")
        assert parse_san(pos, "O-O-O+") == parse_uci("e1c1")

    def test_promotion_san(self):
        pos = parse_fen("8/P7/8/8/8/8/8/K6k w - - 0 1")
        assert parse_san(pos, "a8=Q") == parse_uci("a7a8q")
        assert parse_san(pos, "a8N") == parse_uci("a7a8n")

    def test_pawn_capture(self):
        pos = apply_move(apply_move(startpos(), parse_uci("e2e4")),
                         parse_uci("d7d5"))
        assert parse_san(pos, "exd5") == parse_uci("e4d5")


class TestUci:
    def test_round_trip(self):
        for text in ("e2e4", "e7e8q", "a1h8", "b7b8n"):
            assert parse_uci(text).uci() == text

    def test_bad_uci(self):
        with pytest.raises(MoveError):
            parse_uci("e9e4")


@given(st.integers(0, 2000), st.integers(0, 30))
@settings(max_examples=60, deadline=None)
def test_fen_round_trip_property(seed, plies):
    pos = random_playout(seed, plies)
    fen = to_fen(pos)
    assert to_fen(parse_fen(fen)) == fen


@given(st.integers(0, 2000), st.integers(0, 30))
@settings(max_examples=60, deadline=None)
def test_apply_preserves_invariants(seed, plies):
    pos = random_playout(seed, plies)
    for m in legal_moves(pos)[:8]:
        after = apply_move(pos, m)
        # re-parsing runs the invariant checks
        assert to_fen(parse_fen(to_fen(after))) == to_fen(after)
