import json

import pytest

from src.cli.cache import ArtifactCache, CacheCorruptionError, CacheEntry
from src.engine.abgroup import FinAbGroup
from src.engine.qcomplex import QComplex


def test_key_uses_the_normalized_spec():
    assert CacheEntry("Z/2   x Z/3", 1, "basis").digest() == CacheEntry("Z/2 x Z/3", 1, "basis").digest()
    assert CacheEntry("Z/2", 1, "basis").digest() != CacheEntry("Z/2", 1, "delta").digest()
    assert CacheEntry("Z/2", 1, "basis").digest() != CacheEntry("Z/2", 1, "basis", version=2).digest()


def test_store_then_load(cache_dir):
    cache = ArtifactCache(cache_dir)
    assert cache.load("Z/2", 0, "basis") is None
    assert cache.misses == 1

    cache.store("Z/2", 0, "basis", {"group": "Z/2", "n": 0, "basis": [[1]]})
    assert cache.load("Z/2", 0, "basis") == {"group": "Z/2", "n": 0, "basis": [[1]]}
    assert cache.hits == 1
    assert not list(cache_dir.glob(".tmp-*"))


def test_corrupt_file_is_a_miss(cache_dir, caplog):
    cache = ArtifactCache(cache_dir)
    entry = CacheEntry("Z/2", 0, "basis")
    cache_dir.mkdir(parents=True)
    cache.path_for(entry).write_text("{truncated")
    with pytest.raises(CacheCorruptionError):
        cache.read(entry)
    assert cache.load("Z/2", 0, "basis") is None
    assert cache.misses == 1
    assert "Rebuilding corrupt cache entry" in caplog.text


def test_file_holding_another_key_is_rejected(cache_dir):
    cache = ArtifactCache(cache_dir)
    entry = CacheEntry("Z/2", 0, "basis")
    cache_dir.mkdir(parents=True)
    other = CacheEntry("Z/3", 0, "basis")
    cache.path_for(entry).write_text(json.dumps({"key": other.key(), "payload": {}}))
    with pytest.raises(CacheCorruptionError, match="does not hold"):
        cache.read(entry)


def test_versions_do_not_share_entries(cache_dir):
    ArtifactCache(cache_dir, version=1).store("Z/2", 0, "basis", {"basis": [[1]]})
    assert ArtifactCache(cache_dir, version=2).load("Z/2", 0, "basis") is None


def test_q_complex_reads_back_its_artifacts(cache_dir):
    group = FinAbGroup((2, 2))
    cache = ArtifactCache(cache_dir)
    first = QComplex(group, store=cache)
    delta = first.delta(2)
    assert len(list(cache_dir.glob("*.json"))) == 3

    second_cache = ArtifactCache(cache_dir)
    second = QComplex(group, store=second_cache)
    assert second.delta(2) == delta
    assert second_cache.hits == 3
    assert second_cache.misses == 0


def test_corrupt_artifacts_are_recomputed(cache_dir):
    group = FinAbGroup((3,))
    cache = ArtifactCache(cache_dir)
    expected = QComplex(group, store=cache).delta(1)
    for path in cache_dir.glob("*.json"):
        path.write_text("not json")

    recovered = QComplex(group, store=ArtifactCache(cache_dir))
    assert recovered.delta(1) == expected
    assert QComplex(group, store=ArtifactCache(cache_dir)).delta(1) == expected
