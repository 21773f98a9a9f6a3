"""Content-addressed artifact cache with language-neutral binary payloads.

Layout: ``<root>/<kind>/<video_id>/<config_hash>.bin`` plus a ``.sha256``
checksum sidecar. Writes go to a temp file in the destination directory and
are renamed into place, so readers never observe a partial payload.

Payload encodings share a 16-byte header: 4-byte magic + three
little-endian uint32 dimensions. Masks and edges are 1-bit packed rasters;
error maps, tracks, and embeddings are little-endian float32 arrays.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from filelock import FileLock

log = logging.getLogger(__name__)

KINDS = ("error_maps", "masks", "edges", "tracks", "embeddings", "scores")

_MAGIC_FLOAT = {
    "error_maps": b"DEM1",
    "tracks": b"DTR1",
    "embeddings": b"DEB1",
}
_MAGIC_BITS = {"masks": b"DMK1", "edges": b"DMK1"}
_HEADER = struct.Struct("<4sIII")


class CacheError(RuntimeError):
    pass


def config_hash(config: dict[str, Any]) -> str:
    """Stable 16-hex-digit hash of a JSON-serializable config mapping."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _as_3d(shape: tuple[int, ...]) -> tuple[int, int, int]:
    dims = tuple(shape) + (1, 1, 1)
    if len(shape) > 3:
        raise CacheError(f"payload arrays must be at most 3-D, got {shape}")
    return dims[:3]


def encode_payload(kind: str, value: Any) -> bytes:
    if kind == "scores":
        return json.dumps(value, sort_keys=True, separators=(",", ":")).encode()
    arr = np.asarray(value)
    d0, d1, d2 = _as_3d(arr.shape)
    if kind in _MAGIC_BITS:
        if not np.isin(arr, (0, 1)).all():
            raise CacheError(f"{kind} payload must be a binary raster")
        header = _HEADER.pack(_MAGIC_BITS[kind], d0, d1, d2)
        return header + np.packbits(arr.astype(np.uint8).reshape(-1)).tobytes()
    if kind in _MAGIC_FLOAT:
        header = _HEADER.pack(_MAGIC_FLOAT[kind], d0, d1, d2)
        return header + arr.astype("<f4").tobytes(order="C")
    raise CacheError(f"unknown cache kind {kind!r}")


def decode_payload(kind: str, blob: bytes) -> Any:
    if kind == "scores":
        return json.loads(blob.decode())
    magic, d0, d1, d2 = _HEADER.unpack_from(blob)
    shape = (d0, d1, d2)
    body = blob[_HEADER.size :]
    if kind in _MAGIC_BITS:
        if magic != _MAGIC_BITS[kind]:
            raise CacheError(f"bad magic {magic!r} for kind {kind!r}")
        n = d0 * d1 * d2
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8), count=n)
        return bits.reshape(shape).astype(np.uint8)
    if kind in _MAGIC_FLOAT:
        if magic != _MAGIC_FLOAT[kind]:
            raise CacheError(f"bad magic {magic!r} for kind {kind!r}")
        return np.frombuffer(body, dtype="<f4").reshape(shape).copy()
    raise CacheError(f"unknown cache kind {kind!r}")


@dataclass(frozen=True)
class CacheEntry:
    kind: str
    video_id: str
    producer_config_hash: str
    payload: Any

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise CacheError(f"unknown cache kind {self.kind!r}")


class ArtifactCache:
    """Filesystem cache keyed by (kind, video_id, config_hash).

    Same-key writes are last-writer-wins; the payload and its checksum are
    replaced under a per-key lock so a completed put is always observed as
    a consistent pair. A checksum mismatch on read is reported as absence.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _paths(self, kind: str, video_id: str, cfg_hash: str) -> tuple[Path, Path, Path]:
        base = self.root / kind / video_id
        return (
            base / f"{cfg_hash}.bin",
            base / f"{cfg_hash}.sha256",
            base / f"{cfg_hash}.lock",
        )

    def put(self, entry: CacheEntry) -> Path:
        blob = encode_payload(entry.kind, entry.payload)
        digest = hashlib.sha256(blob).hexdigest()
        bin_path, sha_path, lock_path = self._paths(
            entry.kind, entry.video_id, entry.producer_config_hash
        )
        bin_path.parent.mkdir(parents=True, exist_ok=True)
        with FileLock(str(lock_path)):
            self._atomic_write(bin_path, blob)
            self._atomic_write(sha_path, (digest + "\n").encode())
        return bin_path

    def get(self, kind: str, video_id: str, cfg_hash: str) -> Any | None:
        bin_path, sha_path, _ = self._paths(kind, video_id, cfg_hash)
        if not bin_path.exists() or not sha_path.exists():
            return None
        blob = bin_path.read_bytes()
        expected = sha_path.read_text().strip()
        actual = hashlib.sha256(blob).hexdigest()
        if actual != expected:
            log.warning(
                "cache checksum mismatch for %s/%s/%s; treating as absent",
                kind,
                video_id,
                cfg_hash,
            )
            return None
        return decode_payload(kind, blob)

    def contains(self, kind: str, video_id: str, cfg_hash: str) -> bool:
        return self.get(kind, video_id, cfg_hash) is not None

    @staticmethod
    def _atomic_write(path: Path, data: bytes) -> None:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
