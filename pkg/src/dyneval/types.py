"""Shared data model: video records, frames, masks, error maps, point tracks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


class DataModelError(ValueError):
    """Raised when a record or array violates a data-model invariant."""


@dataclass(frozen=True)
class VideoRecord:
    """Identity and provenance of one generated video.

    ``(model_id, prompt_id, generation_index)`` must be unique within a
    manifest; ``frame_count`` must be at least 3 because middle-frame
    reconstruction consumes frame triples.
    """

    video_id: str
    model_id: str
    prompt_id: str
    generation_index: int
    frame_count: int
    width: int
    height: int
    fps: float
    source_uri: str

    def __post_init__(self) -> None:
        if self.generation_index < 0:
            raise DataModelError(f"{self.video_id}: generation_index must be >= 0")
        if self.frame_count < 3:
            raise DataModelError(
                f"{self.video_id}: frame_count {self.frame_count} < 3 "
                "(middle-frame reconstruction needs triples)"
            )
        if self.width <= 0 or self.height <= 0:
            raise DataModelError(f"{self.video_id}: non-positive dimensions")


class FrameSequence:
    """Ordered stack of H x W x 3 uint8 frames, index origin 0."""

    def __init__(self, frames: np.ndarray | list[np.ndarray]):
        arr = np.asarray(frames)
        if arr.ndim != 4 or arr.shape[-1] != 3:
            raise DataModelError(f"expected (F, H, W, 3) frames, got {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.min() < 0 or arr.max() > 255:
                raise DataModelError("frame intensities outside [0, 255]")
            arr = arr.astype(np.uint8)
        self.frames = arr

    def __len__(self) -> int:
        return self.frames.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.frames[i]

    def __iter__(self):
        return iter(self.frames)

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.frames.shape


@dataclass(frozen=True)
class BinaryMask:
    """H x W {0,1} raster annotating one frame."""

    grid: np.ndarray
    frame_index: int

    def __post_init__(self) -> None:
        g = self.grid
        if g.ndim != 2:
            raise DataModelError(f"mask must be 2-D, got shape {g.shape}")
        if not np.isin(g, (0, 1)).all():
            raise DataModelError("mask values must be strictly in {0, 1}")
        object.__setattr__(self, "grid", g.astype(np.uint8))

    @property
    def area(self) -> int:
        return int(self.grid.sum())


@dataclass(frozen=True)
class ErrorMap:
    """Nonnegative per-pixel reconstruction error for one frame."""

    grid: np.ndarray
    frame_index: int

    def __post_init__(self) -> None:
        g = np.asarray(self.grid, dtype=np.float32)
        if g.ndim != 2:
            raise DataModelError(f"error map must be 2-D, got shape {g.shape}")
        if not np.isfinite(g).all():
            raise DataModelError("error map contains non-finite values")
        if (g < 0).any():
            raise DataModelError("error map contains negative values")
        object.__setattr__(self, "grid", g)


@dataclass
class ErrorMapStack:
    """Error maps for the reconstructed frames of one video.

    ``maps`` has shape (M, H, W); ``frame_indices[m]`` is the frame each
    map measures.
    """

    maps: np.ndarray
    frame_indices: list[int]

    def __post_init__(self) -> None:
        self.maps = np.asarray(self.maps, dtype=np.float32)
        if self.maps.ndim != 3:
            raise DataModelError(f"expected (M, H, W) stack, got {self.maps.shape}")
        if self.maps.shape[0] != len(self.frame_indices):
            raise DataModelError("frame_indices length does not match map count")
        if not np.isfinite(self.maps).all() or (self.maps < 0).any():
            raise DataModelError("error maps must be finite and nonnegative")

    def __len__(self) -> int:
        return self.maps.shape[0]


@dataclass
class TrackSet:
    """Point trajectories for one object.

    ``points`` is (P, F, 2) pixel coordinates (x, y); ``visible`` is (P, F)
    {0,1}. Coordinates must be finite wherever the point is visible.
    """

    object_index: int
    points: np.ndarray
    visible: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        vis = np.asarray(self.visible)
        if pts.ndim != 3 or pts.shape[-1] != 2:
            raise DataModelError(f"points must be (P, F, 2), got {pts.shape}")
        if vis.shape != pts.shape[:2]:
            raise DataModelError("visible shape does not match points")
        if not np.isin(vis, (0, 1)).all():
            raise DataModelError("visibility flags must be in {0, 1}")
        if pts.shape[0] < 1:
            raise DataModelError("a track set needs at least one trajectory")
        if not np.isfinite(pts[vis.astype(bool)]).all():
            raise DataModelError("non-finite coordinates on visible frames")
        self.points = pts
        self.visible = vis.astype(np.uint8)

    @property
    def num_points(self) -> int:
        return self.points.shape[0]

    @property
    def num_frames(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class PromptEntry:
    prompt_id: str
    text: str
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class DatasetManifest:
    """Validated catalogue of models, prompts, and generated videos."""

    models: list[str]
    prompts: list[PromptEntry]
    videos: list[VideoRecord]

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        model_set = set(self.models)
        if len(model_set) != len(self.models):
            raise DataModelError("duplicate model ids in manifest")
        prompt_ids = {p.prompt_id for p in self.prompts}
        if len(prompt_ids) != len(self.prompts):
            raise DataModelError("duplicate prompt ids in manifest")

        seen_video_ids: set[str] = set()
        seen_identity: set[tuple[str, str, int]] = set()
        by_pair: dict[tuple[str, str], list[int]] = {}
        for rec in self.videos:
            if rec.video_id in seen_video_ids:
                raise DataModelError(f"duplicate video_id {rec.video_id!r}")
            seen_video_ids.add(rec.video_id)
            if rec.model_id not in model_set:
                raise DataModelError(
                    f"video {rec.video_id!r} references unknown model {rec.model_id!r}"
                )
            if rec.prompt_id not in prompt_ids:
                raise DataModelError(
                    f"video {rec.video_id!r} references unknown prompt {rec.prompt_id!r}"
                )
            identity = (rec.model_id, rec.prompt_id, rec.generation_index)
            if identity in seen_identity:
                raise DataModelError(
                    f"video {rec.video_id!r}: duplicate identity {identity}"
                )
            seen_identity.add(identity)
            by_pair.setdefault((rec.model_id, rec.prompt_id), []).append(
                rec.generation_index
            )

        for (model_id, prompt_id), indices in by_pair.items():
            expected = list(range(len(indices)))
            if sorted(indices) != expected:
                raise DataModelError(
                    f"non-dense generation indices for ({model_id!r}, {prompt_id!r}): "
                    f"{sorted(indices)}"
                )

    def video(self, video_id: str) -> VideoRecord:
        for rec in self.videos:
            if rec.video_id == video_id:
                return rec
        raise KeyError(video_id)

    def prompt(self, prompt_id: str) -> PromptEntry:
        for p in self.prompts:
            if p.prompt_id == prompt_id:
                return p
        raise KeyError(prompt_id)

    def videos_for(self, model_id: str, prompt_id: str) -> list[VideoRecord]:
        out = [
            r
            for r in self.videos
            if r.model_id == model_id and r.prompt_id == prompt_id
        ]
        return sorted(out, key=lambda r: r.generation_index)
