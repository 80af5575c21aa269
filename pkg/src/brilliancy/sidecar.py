"""Adapter that turns an external engine sidecar into an Evaluator.

Line protocol, over stdio or TCP:

    request:  eval <FEN>\n
    response: v <value> p <uci1>:<p1> <uci2>:<p2> ...\n

Responses are cached per position, so transpositions inside one search
hit the sidecar only once. Timeouts, crashes, and protocol violations are
fatal for the current search and carry the offending FEN.
"""
from __future__ import annotations

import logging
import queue
import socket
import subprocess
import threading
from dataclasses import dataclass
from typing import Optional

from .board import MoveError, Position, legal_moves, parse_fen, parse_uci, to_fen

logger = logging.getLogger(__name__)


class EngineError(RuntimeError):
    pass


class EngineTimeoutError(EngineError):
    pass


class EngineProtocolError(EngineError):
    pass


@dataclass
class EngineEndpoint:
    """Where the sidecar lives: a command line to spawn, or a TCP address."""

    command: Optional[list] = None
    host: Optional[str] = None
    port: Optional[int] = None
    timeout: float = 10.0

    def validate(self) -> None:
        if bool(self.command) == bool(self.host):
            raise ValueError("configure exactly one of command or host/port")
        if self.host and not self.port:
            raise ValueError("TCP endpoint needs a port")


class _StdioTransport:
    def __init__(self, command, timeout):
        self.timeout = timeout
        self.process = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)
        self._lines: "queue.Queue" = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self.process.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def request(self, text: str) -> str:
        if self.process.poll() is not None:
            raise EngineError("engine process exited "
                              f"with code {self.process.returncode}")
        try:
            self.process.stdin.write(text)
            self.process.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EngineError(f"engine process pipe broken: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise EngineTimeoutError(
                f"no response within {self.timeout}s") from None
        if line is None:
            raise EngineError("engine process closed its output")
        return line

    def close(self):
        if self.process.poll() is None:
            self.process.terminate()
            try:
                self.process.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.process.kill()


class _TcpTransport:
    def __init__(self, host, port, timeout):
        self.timeout = timeout
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.sock.settimeout(timeout)
        self._file = self.sock.makefile("rw", encoding="utf-8", newline="\n")

    def request(self, text: str) -> str:
        try:
            self._file.write(text)
            self._file.flush()
            line = self._file.readline()
        except socket.timeout:
            raise EngineTimeoutError(
                f"no response within {self.timeout}s") from None
        except OSError as exc:
            raise EngineError(f"engine connection failed: {exc}") from exc
        if not line:
            raise EngineError("engine connection closed")
        return line

    def close(self):
        try:
            self._file.close()
            self.sock.close()
        except OSError:
            pass


class ExternalEngineEvaluator:
    """Evaluator backed by a sidecar process speaking the line protocol."""

    deterministic = True

    def __init__(self, endpoint: EngineEndpoint, name: str = "external"):
        endpoint.validate()
        self.name = name
        self.endpoint = endpoint
        if endpoint.command:
            self._transport = _StdioTransport(endpoint.command, endpoint.timeout)
        else:
            self._transport = _TcpTransport(endpoint.host, endpoint.port,
                                            endpoint.timeout)
        self._cache: dict = {}

    def clear_cache(self) -> None:
        self._cache.clear()

    def close(self) -> None:
        self._transport.close()

    def evaluate(self, p: Position):
        fen = to_fen(p)
        cached = self._cache.get(fen)
        if cached is None:
            try:
                line = self._transport.request(f"eval {fen}\n")
            except EngineError as exc:
                raise type(exc)(f"{exc} (position {fen})") from exc
            cached = self._parse_response(line, fen)
            self._cache[fen] = cached
        move_probs, value = cached
        moves = legal_moves(p)
        policy = {m: move_probs.get(m.uci(), 0.0) for m in moves}
        return policy, value

    def _parse_response(self, line: str, fen: str):
        tokens = line.split()
        if len(tokens) < 3 or tokens[0] != "v" or tokens[2] != "p":
            raise EngineProtocolError(
                f"malformed response {line!r} (position {fen})")
        try:
            value = float(tokens[1])
        except ValueError:
            raise EngineProtocolError(
                f"bad value in {line!r} (position {fen})") from None
        if not -1.0 <= value <= 1.0:
            raise EngineProtocolError(
                f"value {value} outside [-1, 1] (position {fen})")

        legal = {m.uci() for m in legal_moves(parse_fen(fen))}
        move_probs = {}
        for pair in tokens[3:]:
            uci, _, prob_text = pair.partition(":")
            if not prob_text:
                raise EngineProtocolError(
                    f"bad policy entry {pair!r} (position {fen})")
            try:
                parse_uci(uci)
                prob = float(prob_text)
            except (MoveError, ValueError):
                raise EngineProtocolError(
                    f"bad policy entry {pair!r} (position {fen})") from None
            if uci not in legal:
                raise EngineProtocolError(
                    f"illegal move {uci} in policy (position {fen})")
            if prob < 0:
                raise EngineProtocolError(
                    f"negative probability for {uci} (position {fen})")
            move_probs[uci] = prob

        total = sum(move_probs.values())
        if total <= 0:
            raise EngineProtocolError(
                f"policy sums to {total} (position {fen})")
        if abs(total - 1.0) > 1e-9:
            logger.warning("renormalizing policy for %s (sum %.6f)", fen, total)
            move_probs = {u: p / total for u, p in move_probs.items()}
        return move_probs, value


def external_engine_evaluator(endpoint: EngineEndpoint,
                              name: str = "external") -> ExternalEngineEvaluator:
    return ExternalEngineEvaluator(endpoint, name=name)
