"""
On-disk cache of Q-bases and differentials.

One JSON file per entry, named by the sha256 of its canonical key. Writes go
through a temporary file and ``os.replace``; unreadable or mismatched entries
are reported and treated as misses so the caller recomputes and overwrites.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from src.engine.abgroup import normalize_spec

logger = logging.getLogger(__name__)

CACHE_VERSION = 1


class CacheCorruptionError(RuntimeError):
    """Raised when a cache file exists but cannot be decoded."""


@dataclass(frozen=True)
class CacheEntry:
    group_spec: str
    degree: int
    kind: str
    payload: Optional[Dict[str, Any]] = None
    version: int = CACHE_VERSION

    def key(self) -> Dict[str, Any]:
        return {
            "group": normalize_spec(self.group_spec),
            "degree": self.degree,
            "kind": self.kind,
            "version": self.version,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.key(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ArtifactCache:
    """Content-addressed JSON store; satisfies the engine's artifact-store protocol."""

    def __init__(self, directory: Path, version: int = CACHE_VERSION):
        self.directory = Path(directory)
        self.version = version
        self.hits = 0
        self.misses = 0

    def path_for(self, entry: CacheEntry) -> Path:
        return self.directory / f"{entry.digest()}.json"

    def read(self, entry: CacheEntry) -> Dict[str, Any]:
        """Decode a stored entry, raising ``CacheCorruptionError`` when it is unusable."""
        path = self.path_for(entry)
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CacheCorruptionError(f"Cache file {path} is not valid JSON: {exc}") from exc
        if not isinstance(document, dict) or document.get("key") != entry.key() or "payload" not in document:
            raise CacheCorruptionError(f"Cache file {path} does not hold the entry it is named for.")
        return document["payload"]

    def write(self, entry: CacheEntry) -> Path:
        path = self.path_for(entry)
        self.directory.mkdir(parents=True, exist_ok=True)
        document = {"key": entry.key(), "payload": entry.payload}
        fd, tmp_name = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(document, handle, sort_keys=True, separators=(",", ":"))
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        return path

    # Engine protocol

    def load(self, group_spec: str, degree: int, kind: str) -> Optional[Dict[str, Any]]:
        entry = CacheEntry(group_spec, degree, kind, version=self.version)
        if not self.path_for(entry).exists():
            self.misses += 1
            logger.info("Cache miss: %s degree %s (%s)", group_spec, degree, kind)
            return None
        try:
            payload = self.read(entry)
        except (OSError, CacheCorruptionError) as exc:
            self.misses += 1
            logger.warning("Rebuilding corrupt cache entry: %s", exc)
            return None
        self.hits += 1
        logger.info("Cache hit: %s degree %s (%s)", group_spec, degree, kind)
        return payload

    def store(self, group_spec: str, degree: int, kind: str, payload: Dict[str, Any]) -> None:
        try:
            path = self.write(CacheEntry(group_spec, degree, kind, payload, version=self.version))
            logger.debug("Cached %s degree %s (%s) at %s", group_spec, degree, kind, path)
        except OSError as exc:
            logger.warning("Unable to write cache entry for %s degree %s: %s", group_spec, degree, exc)
