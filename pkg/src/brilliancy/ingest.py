"""Label extraction from annotated games and dataset assembly.

Label mapping, applied per annotated ply:
  * bad marks ($2, $4, $6 or ?, ??, ?!) exclude the ply outright,
  * $3 or "!!" -> brilliant,
  * $1 or "!"  -> good,
  * any other annotation (comment, $5, evaluation NAGs, ...) -> other,
  * unannotated plies are not part of the dataset.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from .board import Move, Position, parse_fen, parse_uci, to_fen
from .pgn import GameRecord

LABEL_BRILLIANT = "brilliant"
LABEL_GOOD = "good"
LABEL_OTHER = "other"
LABELS = (LABEL_BRILLIANT, LABEL_GOOD, LABEL_OTHER)

_BAD_NAGS = {2, 4, 6}
_BAD_SUFFIXES = {"?", "??", "?!"}
_BRILLIANT_NAG = 3
_GOOD_NAG = 1

TEST_FRACTION = 0.10


@dataclass(frozen=True)
class LabeledMove:
    position: Position
    move: Move
    label: str
    game_id: str
    ply_index: int

    def to_record(self) -> dict:
        return {
            "fen": to_fen(self.position),
            "uci": self.move.uci(),
            "label": self.label,
            "game_id": self.game_id,
            "ply": self.ply_index,
        }

    @classmethod
    def from_record(cls, record: dict) -> "LabeledMove":
        return cls(
            position=parse_fen(record["fen"]),
            move=parse_uci(record["uci"]),
            label=record["label"],
            game_id=record["game_id"],
            ply_index=record["ply"],
        )


def classify_annotations(nags, suffix, comments) -> Optional[str]:
    """Map one ply's annotations to a label, or None if excluded."""
    if suffix in _BAD_SUFFIXES or any(n in _BAD_NAGS for n in nags):
        return None
    if suffix == "!!" or _BRILLIANT_NAG in nags:
        return LABEL_BRILLIANT
    if suffix == "!" or _GOOD_NAG in nags:
        return LABEL_GOOD
    if suffix or nags or comments:
        return LABEL_OTHER
    return None


def extract_labeled_moves(game: GameRecord, game_id: Optional[str] = None) -> list:
    gid = game_id if game_id is not None else _default_game_id(game)
    out = []
    for i, ply in enumerate(game.plies):
        label = classify_annotations(ply.nags, ply.suffix, ply.comments)
        if label is not None:
            out.append(LabeledMove(ply.pos_before, ply.move, label, gid, i))
    return out


def _default_game_id(game: GameRecord) -> str:
    study = game.source_study_id or "local"
    return f"{study}:{game.index}"


@dataclass
class DatasetManifest:
    seed: int
    other_cap: Optional[int]
    entries: list = field(default_factory=list)  # (game_id, ply, label, split)

    @property
    def counts(self) -> dict:
        out = {"train": dict.fromkeys(LABELS, 0), "test": dict.fromkeys(LABELS, 0)}
        for _, _, label, split in self.entries:
            out[split][label] += 1
        return out

    def split_of(self) -> dict:
        return {(gid, ply): split for gid, ply, _, split in self.entries}

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "other_cap": self.other_cap,
            "test_fraction": TEST_FRACTION,
            "counts": self.counts,
            "entries": [
                {"game_id": g, "ply": p, "label": lb, "split": s}
                for g, p, lb, s in self.entries
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        payload = json.loads(text)
        manifest = cls(seed=payload["seed"], other_cap=payload["other_cap"])
        manifest.entries = [
            (e["game_id"], e["ply"], e["label"], e["split"])
            for e in payload["entries"]
        ]
        return manifest


def build_dataset(moves: list, seed: int,
                  other_cap: Optional[int] = None) -> DatasetManifest:
    """Optionally subsample the "other" class, then split 90/10 at random.

    Everything is driven by `seed`; the same inputs always produce the
    same manifest.
    """
    if not moves:
        raise ValueError("no labeled moves to build a dataset from")
    rng = random.Random(seed)

    kept = list(range(len(moves)))
    if other_cap is not None:
        other_idx = [i for i in kept if moves[i].label == LABEL_OTHER]
        if len(other_idx) > other_cap:
            keep_other = set(rng.sample(other_idx, other_cap))
            kept = [i for i in kept
                    if moves[i].label != LABEL_OTHER or i in keep_other]

    n_test = int(len(kept) * TEST_FRACTION)
    test_set = set(rng.sample(kept, n_test))

    manifest = DatasetManifest(seed=seed, other_cap=other_cap)
    for i in kept:
        mv = moves[i]
        split = "test" if i in test_set else "train"
        manifest.entries.append((mv.game_id, mv.ply_index, mv.label, split))
    return manifest


def write_dataset_jsonl(moves: list, manifest: DatasetManifest) -> str:
    """Serialize the manifest's entries as JSONL, one LabeledMove each."""
    by_key = {(m.game_id, m.ply_index): m for m in moves}
    lines = []
    for gid, ply, _, split in manifest.entries:
        record = by_key[(gid, ply)].to_record()
        record["split"] = split
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + "\n"


def read_dataset_jsonl(text: str) -> list:
    """Parse dataset JSONL into (LabeledMove, split) pairs."""
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        out.append((LabeledMove.from_record(record), record.get("split", "train")))
    return out
