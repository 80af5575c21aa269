"""Chess rules: positions, legal move generation, FEN/SAN/UCI parsing.

Squares are integers 0..63 with a1 = 0, b1 = 1, ..., h8 = 63. Piece codes
are 0 for empty, 1..6 for white P N B R Q K and 7..12 for the black
pieces. Positions are immutable values; every operation returns a new
Position, so they are safe to share across threads.
"""
from __future__ import annotations

import re
from typing import NamedTuple, Optional

WHITE = 0
BLACK = 1

EMPTY = 0
PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = 1, 2, 3, 4, 5, 6

PIECE_CHARS = ".PNBRQKpnbrqk"
_CHAR_TO_CODE = {c: i for i, c in enumerate(PIECE_CHARS) if c != "."}

# Castling-rights bits.
CASTLE_WK, CASTLE_WQ, CASTLE_BK, CASTLE_BQ = 1, 2, 4, 8
_CASTLE_CHARS = (("K", CASTLE_WK), ("Q", CASTLE_WQ), ("k", CASTLE_BK), ("q", CASTLE_BQ))

# Standard piece values in centipawns, used for the material balance kept
# on every Position (white minus black).
PIECE_VALUES_CP = (0, 100, 300, 325, 500, 900, 0)

STARTPOS_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

FILE_NAMES = "abcdefgh"
RANK_NAMES = "12345678"


class FenError(ValueError):
    """Raised for malformed FEN text or FEN violating position invariants."""


class MoveError(ValueError):
    """Raised for illegal, ambiguous, or unparseable moves."""


def square_name(sq: int) -> str:
    return FILE_NAMES[sq & 7] + RANK_NAMES[sq >> 3]


def parse_square(name: str) -> int:
    if len(name) != 2 or name[0] not in FILE_NAMES or name[1] not in RANK_NAMES:
        raise MoveError(f"bad square {name!r}")
    return (ord(name[1]) - 49) * 8 + (ord(name[0]) - 97)


def piece_kind(code: int) -> int:
    return code - 6 if code > 6 else code


def piece_color(code: int) -> int:
    return BLACK if code > 6 else WHITE


class Move(NamedTuple):
    """A move as (from, to, promotion). Tuple order doubles as the
    canonical move order used everywhere for deterministic tie-breaks."""

    from_sq: int
    to_sq: int
    promo: int = 0  # 0 or KNIGHT..QUEEN

    def uci(self) -> str:
        s = square_name(self.from_sq) + square_name(self.to_sq)
        if self.promo:
            s += "nbrq"[self.promo - KNIGHT]
        return s


_UCI_RE = re.compile(r"^([a-h][1-8])([a-h][1-8])([nbrq]?)$")


def parse_uci(text: str) -> Move:
    m = _UCI_RE.match(text)
    if not m:
        raise MoveError(f"bad UCI move {text!r}")
    promo = "nbrq".index(m.group(3)) + KNIGHT if m.group(3) else 0
    return Move(parse_square(m.group(1)), parse_square(m.group(2)), promo)


def move_to_uci(m: Move) -> str:
    return m.uci()


# ---------------------------------------------------------------------------
# Precomputed geometry tables.

def _build_tables():
    knight = []
    king = []
    orth = []
    diag = []
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        kn = []
        for df, dr in ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)):
            nf, nr = f + df, r + dr
            if 0 <= nf < 8 and 0 <= nr < 8:
                kn.append(nr * 8 + nf)
        knight.append(tuple(kn))
        kg = []
        for df, dr in ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)):
            nf, nr = f + df, r + dr
            if 0 <= nf < 8 and 0 <= nr < 8:
                kg.append(nr * 8 + nf)
        king.append(tuple(kg))
        rays_o = []
        for df, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ray = []
            nf, nr = f + df, r + dr
            while 0 <= nf < 8 and 0 <= nr < 8:
                ray.append(nr * 8 + nf)
                nf += df
                nr += dr
            rays_o.append(tuple(ray))
        orth.append(tuple(rays_o))
        rays_d = []
        for df, dr in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            ray = []
            nf, nr = f + df, r + dr
            while 0 <= nf < 8 and 0 <= nr < 8:
                ray.append(nr * 8 + nf)
                nf += df
                nr += dr
            rays_d.append(tuple(ray))
        diag.append(tuple(rays_d))
    return tuple(knight), tuple(king), tuple(orth), tuple(diag)


KNIGHT_TARGETS, KING_TARGETS, ORTH_RAYS, DIAG_RAYS = _build_tables()


def _build_pawn_tables():
    # PAWN_CAPTURES[color][sq]: squares attacked by a pawn of color on sq.
    # PAWN_ATTACKERS[color][sq]: squares from which such a pawn attacks sq.
    caps = [[()] * 64, [()] * 64]
    atk = [[()] * 64, [()] * 64]
    for color, dr in ((WHITE, 1), (BLACK, -1)):
        for sq in range(64):
            f, r = sq & 7, sq >> 3
            targets = []
            for df in (-1, 1):
                nf, nr = f + df, r + dr
                if 0 <= nf < 8 and 0 <= nr < 8:
                    targets.append(nr * 8 + nf)
            caps[color][sq] = tuple(targets)
            sources = []
            for df in (-1, 1):
                nf, nr = f + df, r - dr
                if 0 <= nf < 8 and 0 <= nr < 8:
                    sources.append(nr * 8 + nf)
            atk[color][sq] = tuple(sources)
    return (tuple(caps[0]), tuple(caps[1])), (tuple(atk[0]), tuple(atk[1]))


PAWN_CAPTURES, PAWN_ATTACKERS = _build_pawn_tables()

# Rays 0..3 orthogonal, 4..7 diagonal, concatenated per square.
_ALL_RAYS = tuple(ORTH_RAYS[sq] + DIAG_RAYS[sq] for sq in range(64))

# _RAY_DIR[a * 64 + b] = index into _ALL_RAYS[a] of the ray through b,
# or -1 when a and b share no line. Drives the exact pin test.
def _build_ray_dirs():
    table = [-1] * (64 * 64)
    for a in range(64):
        for d, ray in enumerate(_ALL_RAYS[a]):
            for b in ray:
                table[a * 64 + b] = d
    return table


_RAY_DIR = _build_ray_dirs()


class Position:
    """Immutable chess position (piece placement plus game-state fields)."""

    __slots__ = ("board", "turn", "castling", "ep", "halfmove", "fullmove",
                 "material_cp", "_legal", "_hash")

    def __init__(self, board: bytes, turn: int, castling: int, ep: Optional[int],
                 halfmove: int, fullmove: int, material_cp: Optional[int] = None):
        self.board = board
        self.turn = turn
        self.castling = castling
        self.ep = ep
        self.halfmove = halfmove
        self.fullmove = fullmove
        if material_cp is None:
            material_cp = 0
            for code in board:
                if code:
                    v = PIECE_VALUES_CP[piece_kind(code)]
                    material_cp += v if code <= 6 else -v
        self.material_cp = material_cp
        self._legal = None
        self._hash = None

    def __eq__(self, other) -> bool:
        return (isinstance(other, Position)
                and self.board == other.board and self.turn == other.turn
                and self.castling == other.castling and self.ep == other.ep
                and self.halfmove == other.halfmove and self.fullmove == other.fullmove)

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((self.board, self.turn, self.castling, self.ep,
                      self.halfmove, self.fullmove))
            self._hash = h
        return h

    def __repr__(self) -> str:
        return f"Position({to_fen(self)!r})"

    def king_square(self, color: int) -> int:
        code = KING if color == WHITE else KING + 6
        return self.board.index(code)

    def piece_at(self, sq: int) -> int:
        return self.board[sq]


def parse_fen(text: str) -> Position:
    """Parse a 6-field FEN string, enforcing the Position invariants."""
    fields = text.split()
    if len(fields) != 6:
        raise FenError(f"expected 6 FEN fields, got {len(fields)}")
    placement, stm, castling, ep_field, halfmove, fullmove = fields

    board = bytearray(64)
    ranks = placement.split("/")
    if len(ranks) != 8:
        raise FenError("placement: expected 8 ranks")
    for i, rank_text in enumerate(ranks):
        rank = 7 - i
        file = 0
        for ch in rank_text:
            if ch.isdigit():
                file += int(ch)
            elif ch in _CHAR_TO_CODE:
                if file > 7:
                    raise FenError(f"placement: rank {rank + 1} overflows")
                board[rank * 8 + file] = _CHAR_TO_CODE[ch]
                file += 1
            else:
                raise FenError(f"placement: illegal piece character {ch!r}")
        if file != 8:
            raise FenError(f"placement: rank {rank + 1} has {file} files")

    if stm == "w":
        turn = WHITE
    elif stm == "b":
        turn = BLACK
    else:
        raise FenError(f"side to move: {stm!r}")

    rights = 0
    if castling != "-":
        for ch in castling:
            for c, bit in _CASTLE_CHARS:
                if ch == c:
                    rights |= bit
                    break
            else:
                raise FenError(f"castling: illegal character {ch!r}")

    if ep_field == "-":
        ep = None
    else:
        try:
            ep = parse_square(ep_field)
        except MoveError:
            raise FenError(f"en passant: bad square {ep_field!r}") from None

    try:
        hm = int(halfmove)
        fm = int(fullmove)
    except ValueError:
        raise FenError("halfmove/fullmove: not an integer") from None
    if hm < 0:
        raise FenError("halfmove: negative")
    if fm < 1:
        raise FenError("fullmove: must be >= 1")

    pos = Position(bytes(board), turn, rights, ep, hm, fm)
    _validate_invariants(pos)
    return pos


def _validate_invariants(p: Position) -> None:
    wk = p.board.count(KING)
    bk = p.board.count(KING + 6)
    if wk != 1 or bk != 1:
        raise FenError(f"invariant: king count (white {wk}, black {bk})")
    if p.ep is not None:
        # White to move: black just double-pushed, so ep is on rank 6.
        rank = p.ep >> 3
        expected = 5 if p.turn == WHITE else 2
        if rank != expected or p.board[p.ep] != EMPTY:
            raise FenError("invariant: en passant square")
    # The side that just moved must not have left its king in check.
    other = p.turn ^ 1
    if is_attacked(p.board, p.king_square(other), p.turn):
        raise FenError("invariant: side not to move is in check")


def to_fen(p: Position) -> str:
    rows = []
    for rank in range(7, -1, -1):
        row = []
        run = 0
        for file in range(8):
            code = p.board[rank * 8 + file]
            if code == EMPTY:
                run += 1
            else:
                if run:
                    row.append(str(run))
                    run = 0
                row.append(PIECE_CHARS[code])
        if run:
            row.append(str(run))
        rows.append("".join(row))
    castle = "".join(c for c, bit in _CASTLE_CHARS if p.castling & bit) or "-"
    ep = square_name(p.ep) if p.ep is not None else "-"
    return " ".join(("/".join(rows), "wb"[p.turn], castle, ep,
                     str(p.halfmove), str(p.fullmove)))


def startpos() -> Position:
    return parse_fen(STARTPOS_FEN)


def is_attacked(board: bytes, sq: int, by: int) -> bool:
    """Is `sq` attacked by any piece of color `by` on `board`?"""
    base = 6 if by == BLACK else 0
    pawn = PAWN + base
    for s in PAWN_ATTACKERS[by][sq]:
        if board[s] == pawn:
            return True
    knight = KNIGHT + base
    for s in KNIGHT_TARGETS[sq]:
        if board[s] == knight:
            return True
    king = KING + base
    for s in KING_TARGETS[sq]:
        if board[s] == king:
            return True
    rook, queen, bishop = ROOK + base, QUEEN + base, BISHOP + base
    for ray in ORTH_RAYS[sq]:
        for s in ray:
            code = board[s]
            if code:
                if code == rook or code == queen:
                    return True
                break
    for ray in DIAG_RAYS[sq]:
        for s in ray:
            code = board[s]
            if code:
                if code == bishop or code == queen:
                    return True
                break
    return False


def in_check(p: Position) -> bool:
    return is_attacked(p.board, p.king_square(p.turn), p.turn ^ 1)


def _pseudo_moves(p: Position) -> list:
    """Pseudo-legal moves, castling excluded. Canonical order not guaranteed."""
    moves = []
    board = p.board
    turn = p.turn
    own_lo, own_hi = (1, 6) if turn == WHITE else (7, 12)
    forward = 8 if turn == WHITE else -8
    start_rank = 1 if turn == WHITE else 6
    promo_rank = 7 if turn == WHITE else 0
    ep = p.ep

    for sq in range(64):
        code = board[sq]
        if not (own_lo <= code <= own_hi):
            continue
        kind = code - 6 if code > 6 else code
        if kind == PAWN:
            to = sq + forward
            if board[to] == EMPTY:
                if (to >> 3) == promo_rank:
                    for pk in (KNIGHT, BISHOP, ROOK, QUEEN):
                        moves.append(Move(sq, to, pk))
                else:
                    moves.append(Move(sq, to))
                    if (sq >> 3) == start_rank and board[to + forward] == EMPTY:
                        moves.append(Move(sq, to + forward))
            for to in PAWN_CAPTURES[turn][sq]:
                target = board[to]
                if target and not (own_lo <= target <= own_hi):
                    if (to >> 3) == promo_rank:
                        for pk in (KNIGHT, BISHOP, ROOK, QUEEN):
                            moves.append(Move(sq, to, pk))
                    else:
                        moves.append(Move(sq, to))
                elif ep is not None and to == ep:
                    moves.append(Move(sq, to))
        elif kind == KNIGHT:
            for to in KNIGHT_TARGETS[sq]:
                target = board[to]
                if not target or not (own_lo <= target <= own_hi):
                    moves.append(Move(sq, to))
        elif kind == KING:
            for to in KING_TARGETS[sq]:
                target = board[to]
                if not target or not (own_lo <= target <= own_hi):
                    moves.append(Move(sq, to))
        else:
            rays = ()
            if kind == ROOK:
                rays = ORTH_RAYS[sq]
            elif kind == BISHOP:
                rays = DIAG_RAYS[sq]
            else:
                rays = ORTH_RAYS[sq] + DIAG_RAYS[sq]
            for ray in rays:
                for to in ray:
                    target = board[to]
                    if target == EMPTY:
                        moves.append(Move(sq, to))
                    else:
                        if not (own_lo <= target <= own_hi):
                            moves.append(Move(sq, to))
                        break
    return moves


def _board_after(p: Position, m: Move) -> bytes:
    """Piece placement after m, without game-state bookkeeping."""
    board = bytearray(p.board)
    code = board[m.from_sq]
    board[m.from_sq] = EMPTY
    kind = piece_kind(code)
    if kind == PAWN and p.ep is not None and m.to_sq == p.ep and board[m.to_sq] == EMPTY:
        # en passant: the captured pawn sits behind the target square
        board[m.to_sq - 8 if p.turn == WHITE else m.to_sq + 8] = EMPTY
    if m.promo:
        code = m.promo + (6 if p.turn == BLACK else 0)
    board[m.to_sq] = code
    if kind == KING and abs(m.to_sq - m.from_sq) == 2:
        # castling: relocate the rook
        if m.to_sq > m.from_sq:
            rook_from, rook_to = m.from_sq + 3, m.from_sq + 1
        else:
            rook_from, rook_to = m.from_sq - 4, m.from_sq - 1
        board[rook_to] = board[rook_from]
        board[rook_from] = EMPTY
    return bytes(board)


def _leaves_king_attacked(p: Position, m: Move) -> bool:
    board = _board_after(p, m)
    ksq = m.to_sq if p.board[m.from_sq] in (KING, KING + 6) else p.king_square(p.turn)
    return is_attacked(board, ksq, p.turn ^ 1)


_CASTLING_SPECS = {
    # color -> (kingside, queenside); each: (bit, king_from, king_to,
    #          rook_home, empty squares, squares that must not be attacked)
    WHITE: (
        (CASTLE_WK, 4, 6, 7, (5, 6), (4, 5, 6)),
        (CASTLE_WQ, 4, 2, 0, (1, 2, 3), (4, 3, 2)),
    ),
    BLACK: (
        (CASTLE_BK, 60, 62, 63, (61, 62), (60, 61, 62)),
        (CASTLE_BQ, 60, 58, 56, (57, 58, 59), (60, 59, 58)),
    ),
}


def legal_moves(p: Position) -> list:
    """All legal moves in canonical order (from_sq, to_sq, promo)."""
    cached = p._legal
    if cached is not None:
        return cached

    board = p.board
    turn = p.turn
    ksq = p.king_square(turn)
    checked = is_attacked(board, ksq, turn ^ 1)
    enemy_base = 0 if turn == BLACK else 6
    enemy_queen = QUEEN + enemy_base
    moves = []
    ksq64 = ksq * 64
    for m in _pseudo_moves(p):
        is_ep = (p.ep is not None and m.to_sq == p.ep
                 and board[m.from_sq] in (PAWN, PAWN + 6))
        if checked or m.from_sq == ksq or is_ep:
            if _leaves_king_attacked(p, m):
                continue
        else:
            d = _RAY_DIR[ksq64 + m.from_sq]
            if d >= 0:
                # exact pin test: walk the king's ray through the vacated
                # square; the move is illegal iff the first piece beyond
                # (ignoring from, stopping at to) is a matching slider
                slider = (ROOK if d < 4 else BISHOP) + enemy_base
                exposed = False
                for s in _ALL_RAYS[ksq][d]:
                    if s == m.from_sq:
                        continue
                    if s == m.to_sq:
                        break
                    code = board[s]
                    if code:
                        exposed = code == slider or code == enemy_queen
                        break
                if exposed:
                    continue
        moves.append(m)

    if not checked:
        rook_code = ROOK if turn == WHITE else ROOK + 6
        king_code = KING if turn == WHITE else KING + 6
        for bit, kfrom, kto, rhome, empties, safe in _CASTLING_SPECS[turn]:
            if not p.castling & bit:
                continue
            if board[kfrom] != king_code or board[rhome] != rook_code:
                continue
            if any(board[s] != EMPTY for s in empties):
                continue
            if any(is_attacked(board, s, turn ^ 1) for s in safe):
                continue
            moves.append(Move(kfrom, kto))

    moves.sort()
    p._legal = moves
    return moves


def has_any_legal_move(p: Position) -> bool:
    """Early-exit existence test. The fast path only ever proves a move
    exists (an unaligned piece with a free pseudo move while not in
    check); anything inconclusive falls back to full generation."""
    cached = p._legal
    if cached is not None:
        return bool(cached)
    board = p.board
    turn = p.turn
    ksq = p.king_square(turn)
    if not is_attacked(board, ksq, turn ^ 1):
        ksq64 = ksq * 64
        own_lo, own_hi = (1, 6) if turn == WHITE else (7, 12)
        forward = 8 if turn == WHITE else -8
        for sq in range(64):
            code = board[sq]
            if not (own_lo <= code <= own_hi) or sq == ksq:
                continue
            if _RAY_DIR[ksq64 + sq] >= 0:
                continue  # possibly pinned: leave to the slow path
            kind = code - 6 if code > 6 else code
            if kind == PAWN:
                if board[sq + forward] == EMPTY:
                    return True
                for to in PAWN_CAPTURES[turn][sq]:
                    target = board[to]
                    if target and not (own_lo <= target <= own_hi):
                        return True
            elif kind == KNIGHT:
                for to in KNIGHT_TARGETS[sq]:
                    target = board[to]
                    if not target or not (own_lo <= target <= own_hi):
                        return True
            else:
                rays = _ALL_RAYS[sq][:4] if kind == ROOK else (
                    _ALL_RAYS[sq][4:] if kind == BISHOP else _ALL_RAYS[sq])
                for ray in rays:
                    if ray:
                        target = board[ray[0]]
                        if not target or not (own_lo <= target <= own_hi):
                            return True
    return bool(legal_moves(p))


def is_terminal(p: Position) -> bool:
    return not legal_moves(p)


def is_checkmate(p: Position) -> bool:
    return not legal_moves(p) and in_check(p)


def is_stalemate(p: Position) -> bool:
    return not legal_moves(p) and not in_check(p)


_ROOK_HOME_BITS = {0: CASTLE_WQ, 7: CASTLE_WK, 56: CASTLE_BQ, 63: CASTLE_BK}


def _apply_unchecked(p: Position, m: Move) -> Position:
    board = p.board
    code = board[m.from_sq]
    kind = piece_kind(code)
    captured = board[m.to_sq]
    is_ep = kind == PAWN and p.ep is not None and m.to_sq == p.ep and captured == EMPTY

    new_board = _board_after(p, m)

    material = p.material_cp
    if captured:
        v = PIECE_VALUES_CP[piece_kind(captured)]
        material += v if captured > 6 else -v
    if is_ep:
        material += -100 if p.turn == BLACK else 100
    if m.promo:
        gain = PIECE_VALUES_CP[m.promo] - 100
        material += gain if p.turn == WHITE else -gain

    rights = p.castling
    if kind == KING:
        rights &= ~(CASTLE_WK | CASTLE_WQ) if p.turn == WHITE else ~(CASTLE_BK | CASTLE_BQ)
    if kind == ROOK and m.from_sq in _ROOK_HOME_BITS:
        rights &= ~_ROOK_HOME_BITS[m.from_sq]
    if captured and m.to_sq in _ROOK_HOME_BITS:
        rights &= ~_ROOK_HOME_BITS[m.to_sq]

    ep = None
    if kind == PAWN and abs(m.to_sq - m.from_sq) == 16:
        ep = (m.from_sq + m.to_sq) // 2

    halfmove = 0 if (kind == PAWN or captured or is_ep) else p.halfmove + 1
    fullmove = p.fullmove + (1 if p.turn == BLACK else 0)
    return Position(new_board, p.turn ^ 1, rights, ep, halfmove, fullmove, material)


def apply_move(p: Position, m: Move) -> Position:
    """Apply a move after verifying it is legal in p."""
    if m not in legal_moves(p):
        raise MoveError(f"illegal move {m.uci()} in {to_fen(p)}")
    return _apply_unchecked(p, m)


# ---------------------------------------------------------------------------
# SAN

_SAN_RE = re.compile(
    r"^([NBRQK])?([a-h])?([1-8])?(x)?([a-h][1-8])(?:=?([NBRQ]))?$")
_SAN_CASTLE_RE = re.compile(r"^(O-O(-O)?|0-0(-0)?)$")
_SAN_STRIP_RE = re.compile(r"[+#!?]+$")

_SAN_KINDS = {"N": KNIGHT, "B": BISHOP, "R": ROOK, "Q": QUEEN, "K": KING}


def parse_san(p: Position, text: str) -> Move:
    """Resolve one SAN token against the legal moves of p.

    Check marks and quality suffixes (+, #, !, ?, !!, ...) are stripped
    before disambiguation.
    """
    token = _SAN_STRIP_RE.sub("", text.strip())
    if not token:
        raise MoveError(f"empty SAN token {text!r}")

    moves = legal_moves(p)
    castle = _SAN_CASTLE_RE.match(token)
    if castle:
        queenside = "-O-" in token or "-0-" in token
        kfrom = 4 if p.turn == WHITE else 60
        kto = kfrom - 2 if queenside else kfrom + 2
        m = Move(kfrom, kto)
        if m in moves and p.board[kfrom] in (KING, KING + 6):
            return m
        raise MoveError(f"no matching legal move for {text!r}")

    match = _SAN_RE.match(token)
    if not match:
        raise MoveError(f"unparseable SAN token {text!r}")
    piece_ch, from_file, from_rank, capture, target, promo_ch = match.groups()
    kind = _SAN_KINDS[piece_ch] if piece_ch else PAWN
    to_sq = parse_square(target)
    promo = _SAN_KINDS[promo_ch] if promo_ch else 0

    candidates = []
    for m in moves:
        code = p.board[m.from_sq]
        if piece_kind(code) != kind:
            continue
        if m.to_sq != to_sq or m.promo != promo:
            continue
        if from_file and (m.from_sq & 7) != ord(from_file) - 97:
            continue
        if from_rank and (m.from_sq >> 3) != ord(from_rank) - 49:
            continue
        if kind == PAWN and capture and (m.from_sq & 7) == (m.to_sq & 7):
            continue
        candidates.append(m)

    if not candidates:
        raise MoveError(f"no matching legal move for {text!r}")
    if len(candidates) > 1:
        raise MoveError(f"ambiguous SAN {text!r}: " +
                        ", ".join(c.uci() for c in candidates))
    return candidates[0]


# ---------------------------------------------------------------------------
# Cheap board measures used by the built-in evaluators.

def pseudo_mobility(p: Position, color: int) -> int:
    """Count of pseudo-legal moves for `color`, ignoring king safety.
    Promotions count once; castling is not counted."""
    board = p.board
    own_lo, own_hi = (1, 6) if color == WHITE else (7, 12)
    forward = 8 if color == WHITE else -8
    start_rank = 1 if color == WHITE else 6
    count = 0
    for sq in range(64):
        code = board[sq]
        if not (own_lo <= code <= own_hi):
            continue
        kind = code - 6 if code > 6 else code
        if kind == PAWN:
            to = sq + forward
            if 0 <= to < 64 and board[to] == EMPTY:
                count += 1
                if (sq >> 3) == start_rank and board[to + forward] == EMPTY:
                    count += 1
            for to in PAWN_CAPTURES[color][sq]:
                target = board[to]
                if target and not (own_lo <= target <= own_hi):
                    count += 1
        elif kind == KNIGHT:
            for to in KNIGHT_TARGETS[sq]:
                target = board[to]
                if not target or not (own_lo <= target <= own_hi):
                    count += 1
        elif kind == KING:
            for to in KING_TARGETS[sq]:
                target = board[to]
                if not target or not (own_lo <= target <= own_hi):
                    count += 1
        else:
            if kind == ROOK:
                rays = ORTH_RAYS[sq]
            elif kind == BISHOP:
                rays = DIAG_RAYS[sq]
            else:
                rays = ORTH_RAYS[sq] + DIAG_RAYS[sq]
            for ray in rays:
                for to in ray:
                    target = board[to]
                    if target == EMPTY:
                        count += 1
                    else:
                        if not (own_lo <= target <= own_hi):
                            count += 1
                        break
    return count


def pawn_shield(p: Position, color: int) -> int:
    """Friendly pawns on the three squares directly ahead of the king."""
    ksq = p.king_square(color)
    f, r = ksq & 7, ksq >> 3
    ahead = r + 1 if color == WHITE else r - 1
    if not 0 <= ahead < 8:
        return 0
    pawn = PAWN if color == WHITE else PAWN + 6
    count = 0
    for df in (-1, 0, 1):
        nf = f + df
        if 0 <= nf < 8 and p.board[ahead * 8 + nf] == pawn:
            count += 1
    return count
