"""Interfaces for the learned components the metrics consume.

Every interface has a deterministic synthetic counterpart in
:mod:`dyneval.backends.synthetic` and a recorded-replay wrapper here so the
whole pipeline runs without any model runtime. Production adapters live in
:mod:`dyneval.backends.adapters`.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from collections import defaultdict

import numpy as np

from ..types import FrameSequence, TrackSet


class BackendError(RuntimeError):
    """A backend failed to produce an output for a request."""


class InterpolatorBackend(ABC):
    """Predicts the middle frame of a frame triple from its two ends."""

    def prepare(self, frames: FrameSequence) -> None:
        """Hook called once per video (and per pyramid level) before use."""

    @abstractmethod
    def predict_middle(self, prev_frame: np.ndarray, next_frame: np.ndarray) -> np.ndarray:
        """Return the predicted frame between two alternate frames.

        Output dimensions equal input dimensions; values in [0, 255].
        """


class EmbedderBackend(ABC):
    """Maps a frame to a unit-length vector of fixed dimension."""

    @abstractmethod
    def embed(self, frame: np.ndarray) -> np.ndarray:
        ...


class GrounderBackend(ABC):
    """Localizes phrases in a reference frame as axis-aligned boxes."""

    @abstractmethod
    def ground(
        self, frame: np.ndarray, phrases: list[str]
    ) -> dict[str, list[tuple[tuple[int, int, int, int], float]]]:
        """Return, per phrase, zero or more ((x0, y0, x1, y1), confidence) boxes."""


class MaskPropagatorBackend(ABC):
    """Propagates initial object regions into per-frame binary masks."""

    @abstractmethod
    def propagate(
        self, frames: FrameSequence, initial_boxes: list[tuple[int, int, int, int]]
    ) -> list[list[np.ndarray]]:
        """Return masks[obj][frame] as H x W {0,1} arrays."""


class AutoMaskerBackend(ABC):
    """Discovers objects without prompts and masks them across all frames.

    This is the mask source for the occlusion edge bands; the
    prompt-grounded masks above are kept as a separate family.
    """

    @abstractmethod
    def auto_masks(self, frames: FrameSequence) -> list[list[np.ndarray]]:
        """Return masks[obj][frame] for every detected object."""


class PointTrackerBackend(ABC):
    """Tracks query points through a video with per-frame visibility."""

    @abstractmethod
    def track(
        self, frames: FrameSequence, queries: np.ndarray, start_frame: int = 0
    ) -> TrackSet:
        """Track (N, 2) query points given at ``start_frame``.

        Trajectory count equals query count and start-frame positions equal
        the query points exactly.
        """


class PhraseExtractorBackend(ABC):
    """Extracts object phrases from a prompt, tagged static or dynamic."""

    @abstractmethod
    def extract(self, prompt_text: str) -> list[tuple[str, str]]:
        """Return (phrase, tag) with tag in {"static", "dynamic"}."""


class CallCounter:
    """Mixin counting backend invocations; lets tests assert cache hits."""

    def __init__(self) -> None:
        self.calls: dict[str, int] = defaultdict(int)

    def _count(self, op: str) -> None:
        self.calls[op] += 1

    def reset_calls(self) -> None:
        self.calls.clear()


def _frame_key(*frames: np.ndarray) -> bytes:
    return b"|".join(np.ascontiguousarray(f).tobytes() for f in frames)


class RecordingInterpolator(InterpolatorBackend, CallCounter):
    """Wraps an interpolator and records every (inputs -> output) pair."""

    def __init__(self, inner: InterpolatorBackend):
        CallCounter.__init__(self)
        self.inner = inner
        self.recordings: dict[bytes, np.ndarray] = {}

    def prepare(self, frames: FrameSequence) -> None:
        self.inner.prepare(frames)

    def predict_middle(self, prev_frame: np.ndarray, next_frame: np.ndarray) -> np.ndarray:
        self._count("predict_middle")
        out = self.inner.predict_middle(prev_frame, next_frame)
        self.recordings[_frame_key(prev_frame, next_frame)] = out
        return out


class ReplayInterpolator(InterpolatorBackend, CallCounter):
    """Serves previously recorded outputs; the CI stand-in for live models."""

    def __init__(self, recordings: dict[bytes, np.ndarray]):
        CallCounter.__init__(self)
        self.recordings = recordings

    def predict_middle(self, prev_frame: np.ndarray, next_frame: np.ndarray) -> np.ndarray:
        self._count("predict_middle")
        key = _frame_key(prev_frame, next_frame)
        if key not in self.recordings:
            raise BackendError("no recording for requested frame pair")
        return self.recordings[key]


class BackendPool:
    """Bounds concurrent backend calls and serializes calls per video."""

    def __init__(self, max_in_flight: int = 4):
        self._slots = threading.Semaphore(max_in_flight)
        self._video_locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock_for(self, video_id: str) -> threading.Lock:
        with self._guard:
            if video_id not in self._video_locks:
                self._video_locks[video_id] = threading.Lock()
            return self._video_locks[video_id]

    def run(self, video_id: str, fn, *args, **kwargs):
        with self._slots:
            with self._lock_for(video_id):
                return fn(*args, **kwargs)
