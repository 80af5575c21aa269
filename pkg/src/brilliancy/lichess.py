"""Minimal Lichess study export client with rate limiting and retries.

Network use is always opt-in at the call sites; nothing here runs during
normal offline ingestion or in tests (tests inject a fake session).
"""
from __future__ import annotations

import threading
import time
from typing import Optional

import requests


class StudyFetchError(RuntimeError):
    pass


class StudyNotFoundError(StudyFetchError):
    pass


class RateLimitedError(StudyFetchError):
    pass


class NetworkDisabledError(StudyFetchError):
    pass


class LichessClient:
    """Fetches study PGN exports from {base_url}/api/study/{id}.pgn."""

    def __init__(self, base_url: str = "https://lichess.org",
                 token: Optional[str] = None,
                 min_interval: float = 1.0,
                 max_retries: int = 3,
                 backoff: float = 2.0,
                 offline: bool = False,
                 session=None,
                 sleep=time.sleep):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self.min_interval = min_interval
        self.max_retries = max_retries
        self.backoff = backoff
        self.offline = offline
        self._session = session if session is not None else requests.Session()
        self._sleep = sleep
        self._lock = threading.Lock()
        self._last_request = 0.0

    def _throttle(self) -> None:
        with self._lock:
            now = time.monotonic()
            wait = self._last_request + self.min_interval - now
            if wait > 0:
                self._sleep(wait)
            self._last_request = time.monotonic()

    def fetch_study(self, study_id: str) -> str:
        """Return the study's PGN export verbatim."""
        if self.offline:
            raise NetworkDisabledError("network disabled")
        if not study_id or not study_id.isalnum():
            raise ValueError(f"malformed study id {study_id!r}")
        url = f"{self.base_url}/api/study/{study_id}.pgn"
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"

        delay = self.backoff
        last_error: Optional[Exception] = None
        for _ in range(self.max_retries + 1):
            self._throttle()
            try:
                response = self._session.get(url, headers=headers, timeout=30)
            except requests.RequestException as exc:
                last_error = exc
                self._sleep(delay)
                delay *= 2
                continue
            if response.status_code == 200:
                return response.text
            if response.status_code == 404:
                raise StudyNotFoundError(f"study not found: {study_id}")
            if response.status_code == 429:
                last_error = RateLimitedError(f"rate limited fetching {study_id}")
                self._sleep(delay)
                delay *= 2
                continue
            raise StudyFetchError(
                f"HTTP {response.status_code} fetching {study_id}")
        if isinstance(last_error, RateLimitedError):
            raise last_error
        raise StudyFetchError(f"transport failure fetching {study_id}: {last_error}")
