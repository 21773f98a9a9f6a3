"""Background scene consistency.

Three scores, all oriented so higher is better:

* ``vb_ms`` — middle-frame reconstruction error, spatially and temporally
  averaged.
* ``ms_debias`` — the same error after zeroing occlusion-prone object edge
  bands and foreground objects, aggregated over a weighted Gaussian
  pyramid with per-level errors normalized by the surviving pixel count.
* ``vb_bg`` — mean cosine similarity of consecutive frame embeddings.

The reported ``combined`` score is the mean of ``vb_bg`` and ``ms_debias``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import morphology, pyramid
from .backends.base import (
    AutoMaskerBackend,
    BackendError,
    EmbedderBackend,
    GrounderBackend,
    InterpolatorBackend,
    MaskPropagatorBackend,
    PhraseExtractorBackend,
)
from .cache import ArtifactCache, CacheEntry, config_hash
from .types import ErrorMapStack, FrameSequence

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeMapConfig:
    """Structuring-element sizes for the occlusion edge band."""

    gradient_kernel: int = 3
    dilation_kernel: int = 9
    dilation_iterations: int = 1

    def __post_init__(self) -> None:
        for name in ("gradient_kernel", "dilation_kernel"):
            k = getattr(self, name)
            if k < 3 or k % 2 == 0:
                raise ValueError(f"{name} must be an odd integer >= 3, got {k}")
        if self.dilation_iterations < 1:
            raise ValueError("dilation_iterations must be >= 1")

    def to_config(self) -> dict:
        return {
            "gradient_kernel": self.gradient_kernel,
            "dilation_kernel": self.dilation_kernel,
            "dilation_iterations": self.dilation_iterations,
        }


@dataclass(frozen=True)
class PyramidConfig:
    """Band-proportional level weights, coarsest level weighted heaviest."""

    levels: int = 4
    raw_weights: tuple[float, ...] = (1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0)

    def __post_init__(self) -> None:
        if self.levels != len(self.raw_weights):
            raise ValueError("levels must equal the number of weights")

    @property
    def normalized_weights(self) -> tuple[float, ...]:
        total = sum(self.raw_weights)
        return tuple(w / total for w in self.raw_weights)

    def to_config(self) -> dict:
        return {"levels": self.levels, "raw_weights": list(self.raw_weights)}


@dataclass
class BackgroundScore:
    vb_ms: float
    ms_debias: float
    vb_bg: float
    combined: float
    per_level_errors: list[float]
    valid_pixel_fraction: float

    def to_dict(self) -> dict:
        return {
            "vb_ms": self.vb_ms,
            "ms_debias": self.ms_debias,
            "vb_bg": self.vb_bg,
            "combined": self.combined,
            "per_level_errors": self.per_level_errors,
            "valid_pixel_fraction": self.valid_pixel_fraction,
        }


@dataclass
class BackgroundBackends:
    """Everything the background pipeline consumes."""

    interpolator: InterpolatorBackend
    scene_embedder: EmbedderBackend
    auto_masker: AutoMaskerBackend
    grounder: GrounderBackend
    propagator: MaskPropagatorBackend
    phrase_extractor: PhraseExtractorBackend
    grounder_confidence: float = 0.35


def compute_ms_error_maps(
    frames: FrameSequence, interpolator: InterpolatorBackend
) -> ErrorMapStack:
    """Reconstruction error for every odd frame from its two neighbors.

    E_i = |predict(frame_{i-1}, frame_{i+1}) - frame_i|, averaged over the
    3 channels. The stack holds floor((F-1)/2) maps.
    """
    n = len(frames)
    if n < 3:
        raise ValueError("middle-frame reconstruction needs at least 3 frames")
    interpolator.prepare(frames)
    maps, indices = [], []
    for i in range(1, n - 1, 2):
        try:
            predicted = interpolator.predict_middle(frames[i - 1], frames[i + 1])
        except BackendError as exc:
            raise BackendError(f"interpolation failed at frame {i}: {exc}") from exc
        diff = np.abs(
            predicted.astype(np.float32) - frames[i].astype(np.float32)
        ).mean(axis=2)
        maps.append(diff)
        indices.append(i)
    return ErrorMapStack(maps=np.stack(maps), frame_indices=indices)


def vb_ms_score(stack: ErrorMapStack) -> float:
    """1 - (mean error over all pixels and maps) / 255; higher is better."""
    if len(stack) == 0:
        raise ValueError("empty error-map stack")
    return float(1.0 - stack.maps.mean() / 255.0)


def compute_edge_map(
    masks: list[np.ndarray],
    cfg: EdgeMapConfig,
    shape: tuple[int, int] | None = None,
) -> np.ndarray:
    """Thickened boundary band of all object masks at one frame.

    Per mask: morphological gradient (dilation minus erosion), then
    dilation; bands are unioned across objects.
    """
    if not masks:
        if shape is None:
            raise ValueError("need an explicit shape when no masks are given")
        return np.zeros(shape, dtype=np.uint8)
    out = np.zeros_like(masks[0], dtype=np.uint8)
    for mask in masks:
        if mask.shape != out.shape:
            raise ValueError("object masks must share dimensions")
        band = morphology.morphological_gradient(mask, cfg.gradient_kernel)
        band = morphology.dilate(band, cfg.dilation_kernel, cfg.dilation_iterations)
        out |= band
    return out


def extract_moving_objects(
    prompt_text: str, extractor: PhraseExtractorBackend
) -> list[str]:
    """Dynamic-tagged object phrases, deduplicated, order preserved."""
    if not prompt_text:
        raise ValueError("prompt text is empty")
    try:
        tagged = extractor.extract(prompt_text)
    except BackendError as exc:
        log.warning("phrase extraction failed (%s); degrading to edge-only debias", exc)
        return []
    seen: set[str] = set()
    out = []
    for phrase, tag in tagged:
        if tag == "dynamic" and phrase not in seen:
            seen.add(phrase)
            out.append(phrase)
    return out


def compute_object_masks(
    frames: FrameSequence,
    phrases: list[str],
    grounder: GrounderBackend,
    propagator: MaskPropagatorBackend,
    confidence_threshold: float = 0.35,
) -> tuple[list[list[np.ndarray]], list[np.ndarray]]:
    """Ground each phrase, propagate, and union the per-object masks.

    Returns (masks[obj][frame], union[frame]). Grounding nothing is not an
    error: the unions are all-zero.
    """
    h, w = frames.height, frames.width
    boxes: list[tuple[int, int, int, int]] = []
    if phrases:
        grounded = grounder.ground(frames[0], phrases)
        for phrase in phrases:
            candidates = [
                (box, conf)
                for box, conf in grounded.get(phrase, [])
                if conf >= confidence_threshold
            ]
            if candidates:
                boxes.append(max(candidates, key=lambda bc: bc[1])[0])
    per_object = propagator.propagate(frames, boxes) if boxes else []
    unions = []
    for i in range(len(frames)):
        u = np.zeros((h, w), dtype=np.uint8)
        for obj_masks in per_object:
            u |= obj_masks[i].astype(np.uint8)
        unions.append(u)
    return per_object, unions


def debias_error_map(
    error_grid: np.ndarray, edge_mask: np.ndarray, object_mask: np.ndarray
) -> tuple[np.ndarray, float]:
    """Zero the error under the edge/object union; report surviving fraction."""
    if error_grid.shape != edge_mask.shape or error_grid.shape != object_mask.shape:
        raise ValueError("error map and masks must share dimensions")
    union = (edge_mask.astype(bool) | object_mask.astype(bool))
    debiased = error_grid * (1.0 - union.astype(error_grid.dtype))
    valid_fraction = float(1.0 - union.mean())
    return debiased, valid_fraction


def ms_debias_score(
    frames: FrameSequence,
    interpolator: InterpolatorBackend,
    auto_masks: list[list[np.ndarray]],
    object_unions: list[np.ndarray],
    edge_cfg: EdgeMapConfig = EdgeMapConfig(),
    pyr_cfg: PyramidConfig = PyramidConfig(),
    min_valid_fraction: float = 0.05,
) -> tuple[float, list[float], float]:
    """Debiased reconstruction error over a weighted Gaussian pyramid.

    ``auto_masks`` are the auto-detected per-object masks (edge-band
    source) and ``object_unions`` the prompt-grounded union mask, both at
    full resolution; each level reuses them through mask downscaling
    (threshold 0.5), with the edge band rebuilt at that level's scale.
    Per-level error averages the surviving pixels only; frames whose
    surviving fraction falls below ``min_valid_fraction`` are dropped.

    Returns (score, per-level errors, full-resolution valid fraction).
    """
    h, w = frames.height, frames.width
    levels = pyramid.feasible_levels(h, w, pyr_cfg.levels)
    weights = list(pyr_cfg.normalized_weights[:levels])
    if levels < pyr_cfg.levels:
        log.warning(
            "frame size %dx%d supports only %d pyramid levels; renormalizing weights",
            w, h, levels,
        )
    frame_levels = pyramid.frame_pyramid(frames.frames, levels)
    auto_levels = [
        [pyramid.mask_pyramid(m, levels) for m in per_frame] for per_frame in auto_masks
    ]
    union_levels = [pyramid.mask_pyramid(u, levels) for u in object_unions]

    per_level_errors: list[float] = []
    level0_valid: list[float] = []
    for lvl in range(levels):
        stack = compute_ms_error_maps(FrameSequence(frame_levels[lvl]), interpolator)
        err_sum = 0.0
        valid_count = 0.0
        for m, i in enumerate(stack.frame_indices):
            edge = compute_edge_map(
                [obj[i][lvl] for obj in auto_levels],
                edge_cfg,
                shape=stack.maps[m].shape,
            )
            union = union_levels[i][lvl] if union_levels else np.zeros_like(edge)
            debiased, valid_fraction = debias_error_map(stack.maps[m], edge, union)
            if lvl == 0:
                level0_valid.append(valid_fraction)
            if valid_fraction < min_valid_fraction:
                continue
            err_sum += float(debiased.sum())
            valid_count += valid_fraction * debiased.size
        per_level_errors.append(err_sum / valid_count if valid_count > 0 else np.nan)

    usable = [not np.isnan(e) for e in per_level_errors]
    if not any(usable):
        raise ValueError("no frame at any level kept enough unmasked pixels to score")
    if not all(usable):
        log.warning("dropping %d fully-masked pyramid levels", usable.count(False))
    weight_sum = sum(wgt for wgt, ok in zip(weights, usable) if ok)
    final_error = sum(
        wgt / weight_sum * err
        for wgt, err, ok in zip(weights, per_level_errors, usable)
        if ok
    )
    score = float(1.0 - final_error / 255.0)
    valid_fraction = float(np.mean(level0_valid)) if level0_valid else 1.0
    return score, per_level_errors, valid_fraction


def vb_bg_score(frames: FrameSequence, embedder: EmbedderBackend) -> float:
    """Mean clamped cosine similarity of consecutive frame embeddings."""
    if len(frames) < 2:
        raise ValueError("need at least 2 frames")
    embeddings = [np.asarray(embedder.embed(f), dtype=np.float64) for f in frames]
    sims = [
        max(0.0, float(np.dot(a, b)))
        for a, b in zip(embeddings[:-1], embeddings[1:])
    ]
    return float(np.mean(sims))


def combined_bg_score(vb_bg: float, ms_debias: float) -> float:
    for name, v in (("vb_bg", vb_bg), ("ms_debias", ms_debias)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    return (vb_bg + ms_debias) / 2.0


def background_config(
    edge_cfg: EdgeMapConfig, pyr_cfg: PyramidConfig, backend_tag: str = "default"
) -> dict:
    return {
        "edge": edge_cfg.to_config(),
        "pyramid": pyr_cfg.to_config(),
        "backends": backend_tag,
    }


def score_background(
    frames: FrameSequence,
    prompt_text: str,
    backends: BackgroundBackends,
    edge_cfg: EdgeMapConfig = EdgeMapConfig(),
    pyr_cfg: PyramidConfig = PyramidConfig(),
    video_id: str | None = None,
    cache: ArtifactCache | None = None,
    backend_tag: str = "default",
) -> BackgroundScore:
    """Full background pipeline for one video, cache-aware.

    With a cache and an unchanged config hash the previous score is
    returned without touching any backend.
    """
    cfg_hash = config_hash(background_config(edge_cfg, pyr_cfg, backend_tag))
    if cache is not None and video_id is not None:
        hit = cache.get("scores", video_id, cfg_hash)
        if hit is not None and hit.get("dimension") == "background":
            return BackgroundScore(
                vb_ms=hit["vb_ms"],
                ms_debias=hit["ms_debias"],
                vb_bg=hit["vb_bg"],
                combined=hit["combined"],
                per_level_errors=hit["per_level_errors"],
                valid_pixel_fraction=hit["valid_pixel_fraction"],
            )

    auto = backends.auto_masker.auto_masks(frames)
    phrases = extract_moving_objects(prompt_text, backends.phrase_extractor)
    _, unions = compute_object_masks(
        frames,
        phrases,
        backends.grounder,
        backends.propagator,
        backends.grounder_confidence,
    )
    stack = compute_ms_error_maps(frames, backends.interpolator)
    vb_ms = vb_ms_score(stack)
    ms_debias, per_level, valid_fraction = ms_debias_score(
        frames, backends.interpolator, auto, unions, edge_cfg, pyr_cfg
    )
    vb_bg = vb_bg_score(frames, backends.scene_embedder)
    score = BackgroundScore(
        vb_ms=vb_ms,
        ms_debias=ms_debias,
        vb_bg=vb_bg,
        combined=combined_bg_score(vb_bg, ms_debias),
        per_level_errors=per_level,
        valid_pixel_fraction=valid_fraction,
    )
    if cache is not None and video_id is not None:
        cache.put(CacheEntry("error_maps", video_id, cfg_hash, stack.maps))
        if auto:
            edges = np.stack(
                [
                    compute_edge_map([obj[i] for obj in auto], edge_cfg)
                    for i in range(len(frames))
                ]
            )
            cache.put(CacheEntry("edges", video_id, cfg_hash, edges))
        if unions:
            cache.put(CacheEntry("masks", video_id, cfg_hash, np.stack(unions)))
        cache.put(
            CacheEntry(
                "scores",
                video_id,
                cfg_hash,
                {"dimension": "background", **score.to_dict()},
            )
        )
    return score
