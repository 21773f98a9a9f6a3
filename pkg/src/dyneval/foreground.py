"""Foreground object consistency from point-track neighbor distances.

Points sampled inside each object mask are tracked through the video; for
every point and each of its k nearest neighbor tracks, the per-frame
Euclidean distance series is compared against its own moving average. The
mean absolute deviation — averaged over neighbors, points, then objects —
is the inconsistency. Distances between co-moving points are untouched by
any global translation or rotation, so the measure isolates object
deformation from camera and object motion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .backends.base import (
    EmbedderBackend,
    GrounderBackend,
    MaskPropagatorBackend,
    PhraseExtractorBackend,
    PointTrackerBackend,
)
from .background import compute_object_masks, extract_moving_objects, vb_bg_score
from .cache import ArtifactCache, CacheEntry, config_hash
from .types import FrameSequence, TrackSet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrackerFGConfig:
    points_per_object: int = 64
    neighbors: int = 8
    moving_average_window: int = 5
    min_covisible_frames: int = 8
    inconsistency_scale: float = 2.0  # px; e^(-delta/scale) maps to [0, 1]

    def __post_init__(self) -> None:
        if self.neighbors >= self.points_per_object:
            raise ValueError("neighbors must be smaller than points_per_object")
        if self.moving_average_window < 3 or self.moving_average_window % 2 == 0:
            raise ValueError("moving_average_window must be odd and >= 3")

    def to_config(self) -> dict:
        return {
            "points_per_object": self.points_per_object,
            "neighbors": self.neighbors,
            "moving_average_window": self.moving_average_window,
            "min_covisible_frames": self.min_covisible_frames,
            "inconsistency_scale": self.inconsistency_scale,
        }


@dataclass
class ForegroundScore:
    tracker_fg_inconsistency: float | None
    tracker_fg: float | None
    vb_sc: float
    combined: float
    objects_found: int

    def to_dict(self) -> dict:
        return {
            "tracker_fg_inconsistency": self.tracker_fg_inconsistency,
            "tracker_fg": self.tracker_fg,
            "vb_sc": self.vb_sc,
            "combined": self.combined,
            "objects_found": self.objects_found,
        }


@dataclass
class ForegroundBackends:
    tracker: PointTrackerBackend
    object_embedder: EmbedderBackend
    grounder: GrounderBackend
    propagator: MaskPropagatorBackend
    phrase_extractor: PhraseExtractorBackend
    grounder_confidence: float = 0.35


def sample_points_in_mask(mask: np.ndarray, count: int, rng_seed: int) -> np.ndarray:
    """Distinct pixel centers sampled uniformly where the mask is 1.

    Deterministic per seed. A mask smaller than ``count`` yields all its
    pixels (with a warning); an empty mask yields an empty set.
    """
    ys, xs = np.nonzero(np.asarray(mask))
    area = len(xs)
    if area == 0:
        return np.zeros((0, 2), dtype=np.float64)
    coords = np.stack([xs, ys], axis=1).astype(np.float64)
    if area <= count:
        if area < count:
            log.warning("mask area %d below requested %d points; taking all", area, count)
        return coords
    rng = np.random.default_rng(rng_seed)
    chosen = rng.choice(area, size=count, replace=False)
    return coords[chosen]


def knn_neighbors(tracks: TrackSet, anchor_frame: int, k: int) -> list[list[int]]:
    """k nearest other tracks per track, by distance at the anchor frame.

    Ties break toward the lower track index; the neighbor sets stay fixed
    for the rest of the pipeline.
    """
    vis = tracks.visible[:, anchor_frame].astype(bool)
    if vis.sum() < k + 1:
        raise ValueError(
            f"need at least {k + 1} visible tracks at frame {anchor_frame}, "
            f"have {int(vis.sum())}"
        )
    pts = tracks.points[:, anchor_frame, :]
    n = tracks.num_points
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    indices = np.arange(n)
    out: list[list[int]] = []
    for p in range(n):
        if not vis[p]:
            out.append([])
            continue
        eligible = vis & (indices != p)
        order = np.lexsort((indices[eligible], dist[p, eligible]))
        out.append(indices[eligible][order][:k].tolist())
    return out


def covisible_frames(tracks: TrackSet, p: int, q: int) -> np.ndarray:
    return np.nonzero(
        tracks.visible[p].astype(bool) & tracks.visible[q].astype(bool)
    )[0]


def neighbor_distance_series(
    tracks: TrackSet, p: int, q: int, min_covisible: int = 1
) -> np.ndarray | None:
    """Per-frame Euclidean distance between two tracks over co-visible frames.

    Returns None when fewer than ``min_covisible`` frames remain.
    """
    frames = covisible_frames(tracks, p, q)
    if len(frames) < min_covisible:
        return None
    diff = tracks.points[p, frames, :] - tracks.points[q, frames, :]
    return np.linalg.norm(diff, axis=1)


def moving_average(series: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window shrinks at the boundaries."""
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or len(series) == 0:
        raise ValueError("series must be a nonempty 1-D array")
    half = window // 2
    out = np.empty_like(series)
    for t in range(len(series)):
        lo = max(0, t - half)
        hi = min(len(series), t + half + 1)
        out[t] = series[lo:hi].mean()
    return out


def track_deviation(series: np.ndarray, averaged: np.ndarray) -> float:
    """Mean absolute deviation of a distance series from its moving average."""
    series = np.asarray(series, dtype=np.float64)
    averaged = np.asarray(averaged, dtype=np.float64)
    if series.shape != averaged.shape:
        raise ValueError("series lengths differ")
    return float(np.abs(series - averaged).mean())


def object_inconsistency(tracks: TrackSet, cfg: TrackerFGConfig) -> float | None:
    """Mean neighbor-distance deviation for one object's track set.

    Neighbor sets are fixed at the first frame where at least k+1 tracks
    are visible. Returns None when the object cannot be scored.
    """
    k = cfg.neighbors
    anchor = None
    for t in range(tracks.num_frames):
        if int(tracks.visible[:, t].sum()) >= k + 1:
            anchor = t
            break
    if anchor is None:
        return None
    neighbor_lists = knn_neighbors(tracks, anchor, k)
    per_point: list[float] = []
    for p, neighbors in enumerate(neighbor_lists):
        if not neighbors:
            continue
        deviations = []
        for q in neighbors:
            series = neighbor_distance_series(
                tracks, p, q, min_covisible=cfg.min_covisible_frames
            )
            if series is None:
                continue
            averaged = moving_average(series, cfg.moving_average_window)
            deviations.append(track_deviation(series, averaged))
        if deviations:
            per_point.append(float(np.mean(deviations)))
    if not per_point:
        return None
    return float(np.mean(per_point))


def normalize_inconsistency(delta: float, scale: float) -> float:
    """Map a pixel-unit inconsistency to (0, 1]; zero deviation maps to 1."""
    return float(np.exp(-delta / scale))


def deviation_time_series(tracks: TrackSet, cfg: TrackerFGConfig) -> np.ndarray:
    """Per-frame mean |d - moving_average(d)| over all neighbor pairs.

    Frames without any co-visible pair are NaN. This is the inspection
    series behind the per-object plots the CLI can emit.
    """
    k = cfg.neighbors
    anchor = None
    for t in range(tracks.num_frames):
        if int(tracks.visible[:, t].sum()) >= k + 1:
            anchor = t
            break
    if anchor is None:
        return np.full(tracks.num_frames, np.nan)
    sums = np.zeros(tracks.num_frames)
    counts = np.zeros(tracks.num_frames)
    for p, neighbors in enumerate(knn_neighbors(tracks, anchor, k)):
        for q in neighbors:
            frames = covisible_frames(tracks, p, q)
            if len(frames) < cfg.min_covisible_frames:
                continue
            diff = tracks.points[p, frames, :] - tracks.points[q, frames, :]
            series = np.linalg.norm(diff, axis=1)
            averaged = moving_average(series, cfg.moving_average_window)
            sums[frames] += np.abs(series - averaged)
            counts[frames] += 1
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def tracker_fg_score(
    frames: FrameSequence,
    object_masks: list[list[np.ndarray]],
    tracker: PointTrackerBackend,
    cfg: TrackerFGConfig = TrackerFGConfig(),
    rng_seed: int = 0,
) -> tuple[float | None, float | None, int]:
    """Track-based inconsistency over all grounded objects.

    Returns (inconsistency in pixels, normalized score, objects scored).
    Objects whose masks are too small or whose tracks thin out are skipped;
    if every object is skipped the caller falls back as if none grounded.
    """
    per_object: list[float] = []
    for n, per_frame_masks in enumerate(object_masks):
        queries = sample_points_in_mask(
            per_frame_masks[0], cfg.points_per_object, rng_seed + n
        )
        if queries.shape[0] < cfg.neighbors + 1:
            log.warning("object %d: too few samplable points; skipped", n)
            continue
        tracks = tracker.track(frames, queries, start_frame=0)
        value = object_inconsistency(tracks, cfg)
        if value is None:
            log.warning("object %d: too few usable track pairs; skipped", n)
            continue
        per_object.append(value)
    if not per_object:
        return None, None, 0
    inconsistency = float(np.mean(per_object))
    return (
        inconsistency,
        normalize_inconsistency(inconsistency, cfg.inconsistency_scale),
        len(per_object),
    )


def vb_sc_score(frames: FrameSequence, object_embedder: EmbedderBackend) -> float:
    """Mean clamped cosine similarity of consecutive object embeddings."""
    return vb_bg_score(frames, object_embedder)


def fg_pair_verdict(
    score_a: ForegroundScore,
    score_b: ForegroundScore,
    video_a: str = "a",
    video_b: str = "b",
) -> str:
    """Preferred side of a foreground pair, with the no-object fallbacks.

    A video in which no object was grounded loses outright to one with
    objects; when both lack objects the embedding baseline decides;
    otherwise the combined score decides. Exact ties go to the
    lexicographically smaller video id.
    """
    if score_a.objects_found > 0 and score_b.objects_found == 0:
        return "a"
    if score_b.objects_found > 0 and score_a.objects_found == 0:
        return "b"
    if score_a.objects_found == 0 and score_b.objects_found == 0:
        va, vb = score_a.vb_sc, score_b.vb_sc
    else:
        va, vb = score_a.combined, score_b.combined
    if va > vb:
        return "a"
    if vb > va:
        return "b"
    return "a" if video_a <= video_b else "b"


def foreground_config(cfg: TrackerFGConfig, backend_tag: str = "default") -> dict:
    return {"tracker_fg": cfg.to_config(), "backends": backend_tag}


def score_foreground(
    frames: FrameSequence,
    prompt_text: str,
    backends: ForegroundBackends,
    cfg: TrackerFGConfig = TrackerFGConfig(),
    rng_seed: int = 0,
    video_id: str | None = None,
    cache: ArtifactCache | None = None,
    backend_tag: str = "default",
) -> ForegroundScore:
    """Full foreground pipeline for one video, cache-aware."""
    cfg_hash = config_hash(foreground_config(cfg, backend_tag))
    if cache is not None and video_id is not None:
        hit = cache.get("scores", video_id, cfg_hash)
        if hit is not None and hit.get("dimension") == "foreground":
            return ForegroundScore(
                tracker_fg_inconsistency=hit["tracker_fg_inconsistency"],
                tracker_fg=hit["tracker_fg"],
                vb_sc=hit["vb_sc"],
                combined=hit["combined"],
                objects_found=hit["objects_found"],
            )

    phrases = extract_moving_objects(prompt_text, backends.phrase_extractor)
    per_object, _ = compute_object_masks(
        frames,
        phrases,
        backends.grounder,
        backends.propagator,
        backends.grounder_confidence,
    )
    inconsistency, normalized, objects_found = tracker_fg_score(
        frames, per_object, backends.tracker, cfg, rng_seed
    )
    vb_sc = vb_sc_score(frames, backends.object_embedder)
    if objects_found > 0:
        combined = (vb_sc + normalized) / 2.0
    else:
        combined = vb_sc
    score = ForegroundScore(
        tracker_fg_inconsistency=inconsistency,
        tracker_fg=normalized,
        vb_sc=vb_sc,
        combined=combined,
        objects_found=objects_found,
    )
    if cache is not None and video_id is not None:
        cache.put(
            CacheEntry(
                "scores",
                video_id,
                cfg_hash,
                {"dimension": "foreground", **score.to_dict()},
            )
        )
    return score
