from __future__ import annotations

import threading

import numpy as np
import pytest

from dyneval.cache import (
    ArtifactCache,
    CacheEntry,
    config_hash,
    decode_payload,
    encode_payload,
)


@pytest.fixture
def cache(tmp_path):
    return ArtifactCache(tmp_path / "cache")


def test_put_get_round_trip(cache):
    payload = np.random.default_rng(0).random((4, 8, 8)).astype(np.float32)
    cache.put(CacheEntry("error_maps", "vid", "abc123", payload))
    got = cache.get("error_maps", "vid", "abc123")
    assert np.array_equal(got, payload)


def test_changed_config_hash_is_absent(cache):
    cache.put(CacheEntry("error_maps", "vid", "abc123", np.zeros((1, 2, 2), np.float32)))
    assert cache.get("error_maps", "vid", "zzz999") is None


def test_mask_payload_bit_packing(cache):
    rng = np.random.default_rng(3)
    masks = (rng.random((5, 16, 16)) > 0.5).astype(np.uint8)
    cache.put(CacheEntry("masks", "vid", "h1", masks))
    got = cache.get("masks", "vid", "h1")
    assert got.dtype == np.uint8
    assert np.array_equal(got, masks)


def test_track_payload_round_trip(cache):
    rng = np.random.default_rng(4)
    tracks = rng.random((7, 12, 3)).astype(np.float32)
    cache.put(CacheEntry("tracks", "vid", "h2", tracks))
    assert np.array_equal(cache.get("tracks", "vid", "h2"), tracks)


def test_scores_payload_json(cache):
    doc = {"vb_ms": 0.9, "per_level_errors": [0.0, 1.0, 2.0, 3.0]}
    cache.put(CacheEntry("scores", "vid", "h3", doc))
    assert cache.get("scores", "vid", "h3") == doc


def test_corrupt_payload_reports_absent(cache, caplog):
    cache.put(CacheEntry("masks", "vid", "h4", np.ones((1, 4, 4), np.uint8)))
    bin_path = cache.root / "masks" / "vid" / "h4.bin"
    bin_path.write_bytes(bin_path.read_bytes()[:-1] + b"\x00")
    with caplog.at_level("WARNING"):
        assert cache.get("masks", "vid", "h4") is None
    assert any("checksum mismatch" in r.message for r in caplog.records)


def test_layout_matches_contract(cache):
    cache.put(CacheEntry("edges", "vid-9", "deadbeef", np.zeros((2, 4, 4), np.uint8)))
    assert (cache.root / "edges" / "vid-9" / "deadbeef.bin").exists()
    assert (cache.root / "edges" / "vid-9" / "deadbeef.sha256").exists()


def test_concurrent_same_key_writes_one_winner(cache):
    payloads = [np.full((2, 8, 8), v, np.float32) for v in range(8)]
    barrier = threading.Barrier(8)

    def writer(payload):
        barrier.wait()
        for _ in range(10):
            cache.put(CacheEntry("error_maps", "vid", "race", payload))

    threads = [threading.Thread(target=writer, args=(p,)) for p in payloads]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    got = cache.get("error_maps", "vid", "race")
    assert got is not None
    assert any(np.array_equal(got, p) for p in payloads)
    # a second read agrees: the final pair is consistent
    again = cache.get("error_maps", "vid", "race")
    assert np.array_equal(got, again)


def test_header_encoding():
    arr = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
    blob = encode_payload("error_maps", arr)
    assert blob[:4] == b"DEM1"
    assert len(blob) == 16 + 24 * 4
    assert np.array_equal(decode_payload("error_maps", blob), arr)


def test_config_hash_stability():
    a = config_hash({"k": 1, "w": [1, 2]})
    b = config_hash({"w": [1, 2], "k": 1})
    c = config_hash({"w": [1, 2], "k": 2})
    assert a == b
    assert a != c
    assert len(a) == 16
