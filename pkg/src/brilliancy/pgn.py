"""PGN reading: tag pairs, movetext with comments, NAGs, SAN quality
suffixes, and nested variations.

Variations are descended into: every ply, mainline or not, ends up in the
game record with its own before-position, in document order. Annotated
teaching lines in study exports live mostly inside variations, so they
must not be dropped.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .board import Move, Position, apply_move, parse_fen, parse_san, startpos


class PgnError(ValueError):
    """Raised for unparseable or illegal PGN content."""


@dataclass
class Ply:
    pos_before: Position
    move: Move
    san: str
    nags: list = field(default_factory=list)       # ints, e.g. [3]
    suffix: Optional[str] = None                   # "!", "!!", "?", "??", "!?", "?!"
    comments: list = field(default_factory=list)   # comment texts, braces stripped

    @property
    def annotated(self) -> bool:
        return bool(self.nags or self.suffix or self.comments)


@dataclass
class GameRecord:
    tags: dict
    plies: list
    source_study_id: Optional[str] = None
    index: int = 0


_TAG_RE = re.compile(r'\[\s*(\w+)\s+"((?:[^"\\]|\\.)*)"\s*\]')
_TOKEN_RE = re.compile(r"""
      (?P<comment>\{[^}]*\})
    | (?P<linecomment>;[^\n]*)
    | (?P<nag>\$\d+)
    | (?P<result>1-0|0-1|1/2-1/2|\*)
    | (?P<open>\()
    | (?P<close>\))
    | (?P<movenum>\d+\.*)
    | (?P<san>[A-Za-z][A-Za-z0-9=+#\-]*[!?]{0,2})
    | (?P<dots>\.\.\.|\.)
""", re.VERBOSE)

_SUFFIX_RE = re.compile(r"([!?]{1,2})$")


def _split_suffix(token: str):
    m = _SUFFIX_RE.search(token)
    if m:
        return token[: m.start()], m.group(1)
    return token, None


class _LineState:
    """One line of play: the current position plus what the last move was,
    so annotations and variation branch points attach correctly."""

    __slots__ = ("pos", "prev_pos", "last_ply")

    def __init__(self, pos: Position):
        self.pos = pos
        self.prev_pos: Optional[Position] = None
        self.last_ply: Optional[Ply] = None


def parse_study_pgn(text: str, source_study_id: Optional[str] = None) -> list:
    """Parse possibly-concatenated PGN games into GameRecords."""
    games = []
    for game_index, (tags, movetext) in enumerate(_split_games(text)):
        try:
            games.append(_parse_game(tags, movetext, game_index, source_study_id))
        except PgnError:
            raise
        except ValueError as exc:
            raise PgnError(f"game {game_index}: {exc}") from exc
    return games


_WS_RE = re.compile(r"\s+")


def _split_games(text: str) -> Iterator:
    """Yield (tags, movetext tokens) per game. A game ends at its
    termination marker; a new tag section after movetext also starts the
    next game."""
    pos = 0
    n = len(text)
    while pos < n:
        tags = {}
        movetext_parts = []
        seen_moves = False
        while pos < n:
            ws = _WS_RE.match(text, pos)
            if ws:
                pos = ws.end()
            if pos >= n:
                break
            if text[pos] == "[":
                m = _TAG_RE.match(text, pos)
                if m and not seen_moves:
                    tags[m.group(1)] = m.group(2).replace('\\"', '"').replace("\\\\", "\\")
                    pos = m.end()
                    continue
                if m and seen_moves:
                    break  # next game's header
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise PgnError(f"unparseable PGN at offset {pos}: {text[pos:pos+20]!r}")
            movetext_parts.append(m.group(0))
            seen_moves = True
            pos = m.end()
            if m.lastgroup == "result":
                break
        if tags or movetext_parts:
            yield tags, movetext_parts


def _parse_game(tags: dict, tokens: list, game_index: int,
                source_study_id: Optional[str]) -> GameRecord:
    if tags.get("FEN"):
        try:
            start = parse_fen(tags["FEN"])
        except ValueError as exc:
            raise PgnError(f"game {game_index}: bad FEN tag: {exc}") from exc
    else:
        start = startpos()

    plies = []
    stack = [_LineState(start)]
    for token in tokens:
        if token.startswith("{"):
            _attach_comment(stack[-1], token[1:-1].strip())
        elif token.startswith(";"):
            _attach_comment(stack[-1], token[1:].strip())
        elif token.startswith("$"):
            state = stack[-1]
            if state.last_ply is not None:
                state.last_ply.nags.append(int(token[1:]))
        elif token == "(":
            state = stack[-1]
            if state.prev_pos is None:
                raise PgnError(f"game {game_index}: variation before any move")
            stack.append(_LineState(state.prev_pos))
        elif token == ")":
            if len(stack) == 1:
                raise PgnError(f"game {game_index}: unbalanced ')'")
            stack.pop()
        elif token in ("1-0", "0-1", "1/2-1/2", "*"):
            break
        elif token[0].isdigit() or token[0] == ".":
            continue  # move number / continuation dots
        else:
            state = stack[-1]
            san_core, suffix = _split_suffix(token)
            try:
                move = parse_san(state.pos, san_core)
            except ValueError as exc:
                raise PgnError(
                    f"game {game_index}, ply {len(plies)}: {exc}") from exc
            ply = Ply(state.pos, move, san_core, suffix=suffix)
            plies.append(ply)
            state.prev_pos = state.pos
            state.pos = apply_move(state.pos, move)
            state.last_ply = ply
    if len(stack) != 1:
        raise PgnError(f"game {game_index}: unclosed variation")
    return GameRecord(tags=tags, plies=plies,
                      source_study_id=source_study_id, index=game_index)


def _attach_comment(state: _LineState, text: str) -> None:
    if state.last_ply is not None:
        state.last_ply.comments.append(text)
