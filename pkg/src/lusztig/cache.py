"""Get-or-compute cache for Hecke coefficients, optionally persisted to disk."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Callable

CACHE_DIR_ENV = "LUSZTIG_CACHE_DIR"


def content_key(*parts: object) -> str:
    text = "|".join(str(p) for p in parts)
    return hashlib.sha256(text.encode()).hexdigest()


class CoefficientCache:
    """
    Maps string keys to JSON-serializable values.

    ``get_or_compute`` is atomic per key: concurrent callers asking for the
    same key compute it once. With a directory, each entry lives in its own
    file named by the key and is written via rename, so readers never see a
    partial file.
    """

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._memory: dict[str, object] = {}
        self._lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}
        self.hits = 0
        self.misses = 0

    @classmethod
    def from_env(cls, directory: str | os.PathLike | None = None) -> CoefficientCache:
        directory = directory or os.environ.get(CACHE_DIR_ENV)
        return cls(directory)

    def _path(self, key: str) -> Path:
        assert self.directory is not None
        return self.directory / key[:2] / f"{key}.json"

    def _load(self, key: str):
        if key in self._memory:
            return True, self._memory[key]
        if self.directory is not None:
            path = self._path(key)
            if path.exists():
                value = json.loads(path.read_text())
                self._memory[key] = value
                return True, value
        return False, None

    def _store(self, key: str, value) -> None:
        self._memory[key] = value
        if self.directory is None:
            return
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(value, fh)
        os.replace(tmp, path)

    def get_or_compute(self, key: str, compute: Callable[[], object]):
        with self._lock:
            found, value = self._load(key)
            if found:
                self.hits += 1
                return value
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            with self._lock:
                found, value = self._load(key)
                if found:
                    self.hits += 1
                    return value
            value = compute()
            with self._lock:
                self.misses += 1
                self._store(key, value)
                self._key_locks.pop(key, None)
            return value

    def __len__(self):
        return len(self._memory)
