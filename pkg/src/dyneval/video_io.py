"""Frame decoding for manifest videos.

Supported sources: ``.npy``/``.npz`` frame stacks, directories of numbered
PNG frames, and any container OpenCV can open. Frames come back as RGB
uint8. Encoding uses lossless FFV1 in an AVI container so that synthetic
fixtures round-trip bit-faithfully.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from .types import FrameSequence, VideoRecord


class VideoDecodeError(RuntimeError):
    pass


def _decode_array(path: Path) -> np.ndarray:
    if path.suffix == ".npy":
        return np.load(path)
    data = np.load(path)
    if "frames" not in data:
        raise VideoDecodeError(f"{path}: .npz file has no 'frames' array")
    return data["frames"]


def _decode_frame_dir(path: Path) -> np.ndarray:
    files = sorted(path.glob("*.png"))
    if not files:
        raise VideoDecodeError(f"{path}: no PNG frames found")
    frames = []
    for f in files:
        img = cv2.imread(str(f), cv2.IMREAD_COLOR)
        if img is None:
            raise VideoDecodeError(f"failed to read frame {f}")
        frames.append(cv2.cvtColor(img, cv2.COLOR_BGR2RGB))
    return np.stack(frames)


def _decode_container(path: Path) -> np.ndarray:
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise VideoDecodeError(f"cannot open video container: {path}")
    frames = []
    try:
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            frames.append(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB))
    finally:
        cap.release()
    if not frames:
        raise VideoDecodeError(f"no frames decoded from {path}")
    return np.stack(frames)


def decode_video(record: VideoRecord) -> FrameSequence:
    """Decode the record's source into frames, checking the manifest shape."""
    path = Path(record.source_uri)
    if not path.exists():
        raise VideoDecodeError(f"{record.video_id}: source not found: {path}")
    if path.is_dir():
        arr = _decode_frame_dir(path)
    elif path.suffix in (".npy", ".npz"):
        arr = _decode_array(path)
    else:
        arr = _decode_container(path)

    if arr.shape[0] != record.frame_count:
        raise VideoDecodeError(
            f"{record.video_id}: decoded {arr.shape[0]} frames but manifest "
            f"declares {record.frame_count} (stale manifest?)"
        )
    if arr.shape[1] != record.height or arr.shape[2] != record.width:
        raise VideoDecodeError(
            f"{record.video_id}: decoded {arr.shape[2]}x{arr.shape[1]} but "
            f"manifest declares {record.width}x{record.height}"
        )
    return FrameSequence(arr)


def encode_video(frames: FrameSequence | np.ndarray, path: str | Path, fps: float = 8.0) -> Path:
    """Write frames losslessly (FFV1/AVI). Used to build test fixtures."""
    path = Path(path)
    if path.suffix != ".avi":
        path = path.with_suffix(".avi")
    arr = frames.frames if isinstance(frames, FrameSequence) else np.asarray(frames)
    h, w = arr.shape[1:3]
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"FFV1"), fps, (w, h)
    )
    if not writer.isOpened():
        raise VideoDecodeError("FFV1 encoder unavailable")
    try:
        for frame in arr:
            writer.write(cv2.cvtColor(frame, cv2.COLOR_RGB2BGR))
    finally:
        writer.release()
    return path
