"""Camera-motion magnitude from whole-frame point tracks.

Per track the population variances of the x and y series are summed; the
mean over tracks is the motion value. Tracks cover the full frame on a
regular grid with no object masking: any camera movement shifts every
tracker, while object motion under a static camera moves only a few.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backends.base import PointTrackerBackend
from .types import FrameSequence, TrackSet


@dataclass(frozen=True)
class CameraMotionResult:
    video_id: str
    c_cam: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.c_cam) or self.c_cam < 0:
            raise ValueError(f"c_cam must be finite and >= 0, got {self.c_cam}")


def grid_queries(h: int, w: int, grid: int = 16) -> np.ndarray:
    """Uniform grid of query points over the full frame."""
    xs = np.linspace(0, w - 1, grid)
    ys = np.linspace(0, h - 1, grid)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.reshape(-1), gy.reshape(-1)], axis=1)


def _population_variance(series: np.ndarray) -> float:
    # shift by the first sample so constant series give exactly zero
    d = series - series[0]
    mu = d.mean()
    return float(((d - mu) ** 2).mean())


def camera_motion_metric(tracks: TrackSet) -> float:
    """Mean per-track coordinate variance across frames."""
    if tracks.num_points < 1:
        raise ValueError("no tracks")
    total = 0.0
    for p in range(tracks.num_points):
        total += _population_variance(np.ascontiguousarray(tracks.points[p, :, 0]))
        total += _population_variance(np.ascontiguousarray(tracks.points[p, :, 1]))
    return total / tracks.num_points


def video_camera_motion(
    video_id: str,
    frames: FrameSequence,
    tracker: PointTrackerBackend,
    grid: int = 16,
) -> CameraMotionResult:
    queries = grid_queries(frames.height, frames.width, grid)
    tracks = tracker.track(frames, queries, start_frame=0)
    return CameraMotionResult(video_id=video_id, c_cam=camera_motion_metric(tracks))


def classify_static(
    results: list[CameraMotionResult], percentile: float = 10.0
) -> tuple[float, dict[str, str]]:
    """Split videos at the given percentile of motion values.

    Returns (threshold, labels) with labels in {"static", "dynamic"}: a
    video is static iff its value is at or below the threshold. When all
    values are equal the split is ill-posed; everything is labeled dynamic.
    """
    if len(results) < 2:
        raise ValueError("need at least 2 videos to classify")
    values = np.array([r.c_cam for r in results])
    if np.ptp(values) == 0:
        return float(values[0]), {r.video_id: "dynamic" for r in results}
    tau = float(np.percentile(values, percentile))  # linear interpolation
    labels = {
        r.video_id: "static" if r.c_cam <= tau else "dynamic" for r in results
    }
    return tau, labels
