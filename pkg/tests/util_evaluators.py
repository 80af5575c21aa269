"""Deterministic toy evaluators for search and feature tests."""
import hashlib

from brilliancy.board import legal_moves, to_fen


class HashEvaluator:
    """Pseudo-random but deterministic policy/value derived from the
    position's FEN. Cheap enough for invariant sweeps."""

    deterministic = True

    def __init__(self, name="hash", salt=0):
        self.name = name
        self.salt = salt
        self.calls = 0

    def _unit(self, text):
        digest = hashlib.sha256(f"{self.salt}:{text}".encode()).digest()
        return int.from_bytes(digest[:8], "big") / 2**64

    def evaluate(self, p):
        self.calls += 1
        fen = to_fen(p)
        moves = legal_moves(p)
        raw = [self._unit(fen + m.uci()) + 1e-6 for m in moves]
        total = sum(raw)
        policy = {m: r / total for m, r in zip(moves, raw)}
        value = 2.0 * self._unit(fen) - 1.0
        return policy, value


class FixedEvaluator:
    """Evaluator with a scripted policy/value per FEN; uniform elsewhere."""

    deterministic = True

    def __init__(self, table, default_value=0.0, name="fixed"):
        self.table = table
        self.default_value = default_value
        self.name = name
        self.calls = 0

    def evaluate(self, p):
        self.calls += 1
        fen = to_fen(p)
        moves = legal_moves(p)
        if fen in self.table:
            priors, value = self.table[fen]
            policy = {m: priors.get(m.uci(), 0.0) for m in moves}
        else:
            policy = {m: 1.0 / len(moves) for m in moves}
            value = self.default_value
        return policy, value


class CountingWrapper:
    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.deterministic = inner.deterministic
        self.calls = 0

    def evaluate(self, p):
        self.calls += 1
        return self.inner.evaluate(p)
