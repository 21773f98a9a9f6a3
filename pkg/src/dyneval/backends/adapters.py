"""Adapters that talk to external model processes or services.

The toolkit never links model runtimes directly: an adapter exchanges the
cache binary payload formats plus a JSON control message
``{op, video_id, params}``. The adapter target is either an executable
path (invoked as ``exe <control.json>``) or an HTTP URL (POSTed the
control message); either writes its response payload to the path named in
the control message.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from ..cache import decode_payload, encode_payload
from ..types import FrameSequence, TrackSet
from .base import (
    AutoMaskerBackend,
    BackendError,
    EmbedderBackend,
    GrounderBackend,
    InterpolatorBackend,
    MaskPropagatorBackend,
    PhraseExtractorBackend,
    PointTrackerBackend,
)


class AdapterTarget:
    """Dispatch a control message to an executable or an HTTP endpoint."""

    def __init__(self, address: str, timeout: float = 300.0):
        self.address = address
        self.timeout = timeout

    def call(self, control: dict[str, Any]) -> None:
        if self.address.startswith(("http://", "https://")):
            import httpx

            resp = httpx.post(self.address, json=control, timeout=self.timeout)
            if resp.status_code != 200:
                raise BackendError(
                    f"adapter {self.address} returned HTTP {resp.status_code}"
                )
            return
        proc = subprocess.run(
            [self.address, control["control_path"]],
            capture_output=True,
            timeout=self.timeout,
        )
        if proc.returncode != 0:
            raise BackendError(
                f"adapter {self.address} exited {proc.returncode}: "
                f"{proc.stderr.decode(errors='replace')[:500]}"
            )


def _run_op(
    target: AdapterTarget,
    op: str,
    video_id: str,
    params: dict[str, Any],
    request_kind: str,
    request_payload: Any,
    response_kind: str,
) -> Any:
    with tempfile.TemporaryDirectory(prefix="dyneval-adapter-") as tmp:
        tmp_path = Path(tmp)
        request_path = tmp_path / "request.bin"
        response_path = tmp_path / "response.bin"
        request_path.write_bytes(encode_payload(request_kind, request_payload))
        control = {
            "op": op,
            "video_id": video_id,
            "params": params,
            "request_path": str(request_path),
            "request_kind": request_kind,
            "response_path": str(response_path),
            "response_kind": response_kind,
        }
        control_path = tmp_path / "control.json"
        control_path.write_text(json.dumps(control, sort_keys=True))
        control["control_path"] = str(control_path)
        control_path.write_text(json.dumps(control, sort_keys=True))
        target.call(control)
        if not response_path.exists():
            raise BackendError(f"adapter produced no response for op {op!r}")
        return decode_payload(response_kind, response_path.read_bytes())


class AdapterInterpolator(InterpolatorBackend):
    """Middle-frame prediction through an external adapter."""

    def __init__(self, target: AdapterTarget, video_id: str = "", params: dict | None = None):
        self.target = target
        self.video_id = video_id
        self.params = params or {}

    def predict_middle(self, prev_frame: np.ndarray, next_frame: np.ndarray) -> np.ndarray:
        h, w = prev_frame.shape[:2]
        stacked = np.stack([prev_frame, next_frame]).astype(np.float32).reshape(2, h, w * 3)
        out = _run_op(
            self.target,
            "interpolate_middle",
            self.video_id,
            {**self.params, "height": h, "width": w},
            "error_maps",
            stacked,
            "error_maps",
        )
        return np.clip(out.reshape(h, w, 3), 0, 255).astype(np.uint8)


class AdapterTracker(PointTrackerBackend):
    """Point tracking through an external adapter."""

    def __init__(self, target: AdapterTarget, video_id: str = "", params: dict | None = None):
        self.target = target
        self.video_id = video_id
        self.params = params or {}

    def track(self, frames: FrameSequence, queries: np.ndarray, start_frame: int = 0) -> TrackSet:
        queries = np.asarray(queries, dtype=np.float32)
        request = np.concatenate(
            [queries, np.full((queries.shape[0], 1), start_frame, dtype=np.float32)],
            axis=1,
        )
        out = _run_op(
            self.target,
            "track_points",
            self.video_id,
            {**self.params, "num_frames": len(frames)},
            "tracks",
            request.reshape(queries.shape[0], 1, 3),
            "tracks",
        )
        points = out[:, :, :2].astype(np.float64)
        visible = (out[:, :, 2] > 0.5).astype(np.uint8)
        return TrackSet(object_index=0, points=points, visible=visible)


def _frames_payload(frames: FrameSequence) -> np.ndarray:
    f, h, w, _ = frames.shape
    return frames.frames.astype(np.float32).reshape(f, h, w * 3)


class AdapterEmbedder(EmbedderBackend):
    def __init__(self, target: AdapterTarget, video_id: str = "", params: dict | None = None):
        self.target = target
        self.video_id = video_id
        self.params = params or {}

    def embed(self, frame: np.ndarray) -> np.ndarray:
        h, w = frame.shape[:2]
        out = _run_op(
            self.target,
            "embed_frame",
            self.video_id,
            {**self.params, "height": h, "width": w},
            "error_maps",
            frame.astype(np.float32).reshape(1, h, w * 3),
            "embeddings",
        )
        vector = out.reshape(-1).astype(np.float64)
        return vector / np.linalg.norm(vector)


class AdapterGrounder(GrounderBackend):
    """Boxes come back as a float array: one (x0, y0, x1, y1, conf) row per
    phrase index, conf < 0 meaning no detection."""

    def __init__(self, target: AdapterTarget, video_id: str = "", params: dict | None = None):
        self.target = target
        self.video_id = video_id
        self.params = params or {}

    def ground(self, frame: np.ndarray, phrases: list[str]):
        h, w = frame.shape[:2]
        out = _run_op(
            self.target,
            "ground_phrases",
            self.video_id,
            {**self.params, "phrases": phrases, "height": h, "width": w},
            "error_maps",
            frame.astype(np.float32).reshape(1, h, w * 3),
            "embeddings",
        )
        rows = out.reshape(len(phrases), -1)
        result = {}
        for phrase, row in zip(phrases, rows):
            x0, y0, x1, y1, conf = row[:5]
            if conf < 0:
                result[phrase] = []
            else:
                result[phrase] = [((int(x0), int(y0), int(x1), int(y1)), float(conf))]
        return result


class AdapterMaskPropagator(MaskPropagatorBackend):
    """Response masks are stacked as (num_objects * F, H, W)."""

    def __init__(self, target: AdapterTarget, video_id: str = "", params: dict | None = None):
        self.target = target
        self.video_id = video_id
        self.params = params or {}

    def propagate(self, frames: FrameSequence, initial_boxes):
        f = len(frames)
        out = _run_op(
            self.target,
            "propagate_masks",
            self.video_id,
            {**self.params, "boxes": [list(map(int, b)) for b in initial_boxes], "num_frames": f},
            "error_maps",
            _frames_payload(frames),
            "masks",
        )
        n = out.shape[0] // f
        return [list(out[obj * f : (obj + 1) * f]) for obj in range(n)]


class AdapterAutoMasker(AutoMaskerBackend):
    """Response masks are stacked as (num_objects * F, H, W)."""

    def __init__(self, target: AdapterTarget, video_id: str = "", params: dict | None = None):
        self.target = target
        self.video_id = video_id
        self.params = params or {}

    def auto_masks(self, frames: FrameSequence):
        f = len(frames)
        out = _run_op(
            self.target,
            "auto_masks",
            self.video_id,
            {**self.params, "num_frames": f},
            "error_maps",
            _frames_payload(frames),
            "masks",
        )
        n = out.shape[0] // f
        return [list(out[obj * f : (obj + 1) * f]) for obj in range(n)]


class AdapterPhraseExtractor(PhraseExtractorBackend):
    """Phrases travel in the JSON control message and a JSON response."""

    def __init__(self, target: AdapterTarget, params: dict | None = None):
        self.target = target
        self.params = params or {}

    def extract(self, prompt_text: str) -> list[tuple[str, str]]:
        out = _run_op(
            self.target,
            "extract_phrases",
            "",
            {**self.params, "prompt_text": prompt_text},
            "scores",
            {"prompt_text": prompt_text},
            "scores",
        )
        return [(item["phrase"], item["tag"]) for item in out["phrases"]]
