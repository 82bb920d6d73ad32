"""In-memory TTL cache for serialized figures."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass


@dataclass
class CacheEntry:
    key: str
    value: bytes
    created: float
    ttl: float

    def expired(self, now: float) -> bool:
        return now - self.created >= self.ttl


class TTLCache:
    def __init__(self, ttl: float, clock=time.monotonic):
        self.ttl = ttl
        self.clock = clock
        self._entries: dict[str, CacheEntry] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> bytes | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            if entry.expired(self.clock()):
                del self._entries[key]
                return None
            return entry.value

    def put(self, key: str, value: bytes) -> None:
        with self._lock:
            self._entries[key] = CacheEntry(key, value, self.clock(), self.ttl)

    def __len__(self):
        with self._lock:
            return len(self._entries)
