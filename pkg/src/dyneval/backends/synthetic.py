"""Deterministic synthetic scenes with analytic ground truth.

A scene is a periodic textured background panned by an integer per-frame
camera translation, plus sprites with their own trajectories, z-order,
rotation, and (for track tests) a per-point deformation field. Rendering,
masks, tracks, and occlusion flags are all exact functions of the seed, so
every metric in the toolkit can be tested without any learned model.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

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


class SpriteOutOfBounds(ValueError):
    pass


@dataclass(frozen=True)
class Sprite:
    """One textured object: binary shape, trajectory, and optional motion.

    ``start`` and ``velocity`` are the top-left corner in image coordinates
    (x, y). ``deform_amplitude`` drives the sinusoidal per-point jitter used
    by the analytic tracks; it does not alter rendering.
    """

    mask: np.ndarray
    texture: np.ndarray
    start: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    z: int = 1
    rotation_per_frame: float = 0.0
    deform_amplitude: float = 0.0
    deform_period: float = 8.0

    @property
    def size(self) -> tuple[int, int]:
        return self.mask.shape  # (h, w)

    def top_left(self, frame: int) -> tuple[float, float]:
        return (
            self.start[0] + frame * self.velocity[0],
            self.start[1] + frame * self.velocity[1],
        )

    def center(self, frame: int) -> tuple[float, float]:
        x0, y0 = self.top_left(frame)
        h, w = self.mask.shape
        return (x0 + (w - 1) / 2.0, y0 + (h - 1) / 2.0)


@dataclass(frozen=True)
class SyntheticScene:
    """Seeded scene description; everything downstream is deterministic."""

    seed: int
    camera_velocity: tuple[int, int] = (0, 0)
    sprites: tuple[Sprite, ...] = ()
    texture_period: int = 32

    def __post_init__(self) -> None:
        dx, dy = self.camera_velocity
        if dx != int(dx) or dy != int(dy):
            raise ValueError("camera velocity must be integer pixels per frame")


def smooth_texture(seed: int, period: int) -> np.ndarray:
    """Periodic smooth RGB tile; wrap-filtered so rolls are seamless."""
    rng = np.random.default_rng(seed)
    noise = rng.random((period, period, 3))
    tile = ndimage.gaussian_filter(noise, sigma=(period / 8.0, period / 8.0, 0), mode="wrap")
    lo, hi = tile.min(), tile.max()
    tile = (tile - lo) / (hi - lo) if hi > lo else np.zeros_like(tile)
    return (20 + tile * 215).astype(np.uint8)


def square_sprite(side: int, color: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    mask = np.ones((side, side), dtype=np.uint8)
    texture = np.full((side, side, 3), color, dtype=np.uint8)
    return mask, texture


def disc_sprite(radius: int, color: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    side = 2 * radius + 1
    yy, xx = np.mgrid[:side, :side]
    mask = ((yy - radius) ** 2 + (xx - radius) ** 2 <= radius**2).astype(np.uint8)
    texture = np.full((side, side, 3), color, dtype=np.uint8)
    return mask, texture


def _background(scene: SyntheticScene, h: int, w: int) -> np.ndarray:
    tile = smooth_texture(scene.seed, scene.texture_period)
    reps = (-(-h // scene.texture_period), -(-w // scene.texture_period), 1)
    return np.tile(tile, reps)[:h, :w]


def sprite_raster(sprite: Sprite, frame: int, h: int, w: int) -> np.ndarray:
    """Exact {0,1} occupancy of a sprite at one frame (no occlusion)."""
    raster = np.zeros((h, w), dtype=np.uint8)
    _paint_sprite(sprite, frame, raster, None)
    return raster


def _paint_sprite(
    sprite: Sprite, frame: int, raster: np.ndarray, image: np.ndarray | None
) -> None:
    h, w = raster.shape
    sh, sw = sprite.mask.shape
    theta = frame * sprite.rotation_per_frame
    if theta == 0.0:
        x0, y0 = sprite.top_left(frame)
        xi, yi = int(round(x0)), int(round(y0))
        if xi < 0 or yi < 0 or xi + sw > w or yi + sh > h:
            raise SpriteOutOfBounds(
                f"sprite leaves the frame at frame {frame}: top-left ({xi}, {yi})"
            )
        region = sprite.mask.astype(bool)
        raster[yi : yi + sh, xi : xi + sw][region] = 1
        if image is not None:
            image[yi : yi + sh, xi : xi + sw][region] = sprite.texture[region]
        return

    # Rotated placement: inverse nearest-neighbor mapping over a padded box.
    cx, cy = sprite.center(frame)
    radius = int(np.ceil(np.hypot(sh, sw) / 2.0)) + 1
    if cx - radius < 0 or cy - radius < 0 or cx + radius > w - 1 or cy + radius > h - 1:
        raise SpriteOutOfBounds(f"rotated sprite leaves the frame at frame {frame}")
    y_lo, y_hi = int(np.floor(cy - radius)), int(np.ceil(cy + radius)) + 1
    x_lo, x_hi = int(np.floor(cx - radius)), int(np.ceil(cx + radius)) + 1
    yy, xx = np.mgrid[y_lo:y_hi, x_lo:x_hi]
    dx, dy = xx - cx, yy - cy
    cos_t, sin_t = np.cos(-theta), np.sin(-theta)
    sx = cos_t * dx - sin_t * dy + (sw - 1) / 2.0
    sy = sin_t * dx + cos_t * dy + (sh - 1) / 2.0
    sxi, syi = np.rint(sx).astype(int), np.rint(sy).astype(int)
    inside = (sxi >= 0) & (sxi < sw) & (syi >= 0) & (syi < sh)
    hit = np.zeros_like(inside)
    hit[inside] = sprite.mask[syi[inside], sxi[inside]] > 0
    raster[yy[hit], xx[hit]] = 1
    if image is not None:
        image[yy[hit], xx[hit]] = sprite.texture[syi[hit], sxi[hit]]


def render_synthetic_scene(scene: SyntheticScene, num_frames: int, h: int, w: int) -> FrameSequence:
    """Render frames; repeated calls are bit-identical for a given scene."""
    if num_frames < 3:
        raise ValueError("scenes need at least 3 frames")
    base = _background(scene, h, w)
    dx, dy = scene.camera_velocity
    frames = np.empty((num_frames, h, w, 3), dtype=np.uint8)
    order = sorted(scene.sprites, key=lambda s: s.z)
    for i in range(num_frames):
        img = np.roll(base, shift=(-i * dy, -i * dx), axis=(0, 1)).copy()
        raster = np.zeros((h, w), dtype=np.uint8)
        for sprite in order:
            _paint_sprite(sprite, i, raster, img)
        frames[i] = img
    return FrameSequence(frames)


def oracle_interpolate(scene: SyntheticScene, i: int, num_frames: int, h: int, w: int) -> np.ndarray:
    """The true frame ``i`` — what a perfect middle-frame predictor returns."""
    return render_synthetic_scene(scene, num_frames, h, w)[i]


def oracle_masks(scene: SyntheticScene, num_frames: int, h: int, w: int) -> list[list[np.ndarray]]:
    """Exact sprite rasters as masks[obj][frame]."""
    return [
        [sprite_raster(sprite, i, h, w) for i in range(num_frames)]
        for sprite in scene.sprites
    ]


def _deform_basis(scene_seed: int, offset: tuple[float, float]) -> tuple[float, np.ndarray]:
    """Deterministic per-material-point jitter phase and unit direction."""
    key = f"{scene_seed}:{offset[0]:.3f}:{offset[1]:.3f}".encode()
    digest = hashlib.sha256(key).digest()
    phase = 2 * np.pi * int.from_bytes(digest[:8], "little") / 2**64
    angle = 2 * np.pi * int.from_bytes(digest[8:16], "little") / 2**64
    return phase, np.array([np.cos(angle), np.sin(angle)])


def _owning_sprite(scene: SyntheticScene, point: np.ndarray, frame: int, h: int, w: int) -> int | None:
    xi, yi = int(round(point[0])), int(round(point[1]))
    if not (0 <= xi < w and 0 <= yi < h):
        return None
    best = None
    for n, sprite in enumerate(scene.sprites):
        if sprite_raster(sprite, frame, h, w)[yi, xi]:
            if best is None or sprite.z >= scene.sprites[best].z:
                best = n
    return best


def oracle_tracks(
    scene: SyntheticScene,
    queries: np.ndarray,
    num_frames: int,
    h: int,
    w: int,
    start_frame: int = 0,
    object_index: int = 0,
) -> TrackSet:
    """Analytically advected tracks with exact occlusion flags.

    Points inside a sprite at the start frame move rigidly with it (plus
    the sprite's deformation jitter); other points move with the
    background. A point is invisible while out of frame or covered by a
    strictly-higher-z sprite raster.
    """
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != 2:
        raise ValueError("queries must be (N, 2) (x, y) points")
    n_pts = queries.shape[0]
    points = np.zeros((n_pts, num_frames, 2))
    visible = np.zeros((n_pts, num_frames), dtype=np.uint8)
    cam = np.array(scene.camera_velocity, dtype=np.float64)

    rasters = {
        n: [sprite_raster(s, i, h, w) for i in range(num_frames)]
        for n, s in enumerate(scene.sprites)
    }

    for p, q in enumerate(queries):
        if not (0 <= q[0] <= w - 1 and 0 <= q[1] <= h - 1):
            raise ValueError(f"query point {q} outside frame at start")
        owner = _owning_sprite(scene, q, start_frame, h, w)
        if owner is None:
            for t in range(num_frames):
                points[p, t] = q - (t - start_frame) * cam
        else:
            sprite = scene.sprites[owner]
            c0 = np.array(sprite.center(start_frame))
            offset = q - c0
            phase, direction = _deform_basis(scene.seed, tuple(offset))
            for t in range(num_frames):
                theta = (t - start_frame) * sprite.rotation_per_frame
                rot = np.array(
                    [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
                )
                pos = np.array(sprite.center(t)) + rot @ offset
                if sprite.deform_amplitude:
                    pos = pos + sprite.deform_amplitude * np.sin(
                        2 * np.pi * t / sprite.deform_period + phase
                    ) * direction
                points[p, t] = pos

        owner_z = scene.sprites[owner].z if owner is not None else -np.inf
        for t in range(num_frames):
            x, y = points[p, t]
            xi, yi = int(round(x)), int(round(y))
            if not (0 <= xi < w and 0 <= yi < h):
                continue
            occluded = any(
                scene.sprites[n].z > owner_z and rasters[n][t][yi, xi]
                for n in rasters
                if n != owner
            )
            visible[p, t] = 0 if occluded else 1

    return TrackSet(object_index=object_index, points=points, visible=visible)


def inject_patch_flicker(
    frames: FrameSequence,
    x: int,
    y: int,
    size: int,
    amplitude: int,
    frame_indices: list[int] | None = None,
) -> FrameSequence:
    """Perturb a square patch by exactly ``amplitude`` intensity levels.

    Each affected pixel moves by +amplitude when it has headroom, else
    -amplitude, so |distorted - clean| equals the amplitude everywhere in
    the patch. Defaults to odd frames (the reconstructed ones).
    """
    arr = frames.frames.copy()
    if frame_indices is None:
        frame_indices = [i for i in range(1, len(frames) - 1, 2)]
    for i in frame_indices:
        patch = arr[i, y : y + size, x : x + size].astype(np.int16)
        up = patch + amplitude <= 255
        arr[i, y : y + size, x : x + size] = np.where(
            up, patch + amplitude, patch - amplitude
        ).astype(np.uint8)
    return FrameSequence(arr)


class OracleInterpolator(InterpolatorBackend):
    """Perfect predictor: memorizes a sequence and returns its true middles.

    With ``frozen=True`` the pipeline's per-level ``prepare`` calls become
    no-ops, letting tests memorize a clean render and then score a
    perturbed copy of it.
    """

    def __init__(self, frozen: bool = False):
        self.frozen = frozen
        self._middles: dict[bytes, np.ndarray] = {}

    def memorize(self, frames: FrameSequence | np.ndarray) -> None:
        arr = frames.frames if isinstance(frames, FrameSequence) else np.asarray(frames)
        for i in range(1, arr.shape[0] - 1):
            key = arr[i - 1].tobytes() + arr[i + 1].tobytes()
            if key in self._middles and not np.array_equal(self._middles[key], arr[i]):
                raise BackendError("ambiguous frame pair in memorized sequence")
            self._middles[key] = arr[i].copy()

    def prepare(self, frames: FrameSequence) -> None:
        if not self.frozen:
            self.memorize(frames)

    def predict_middle(self, prev_frame: np.ndarray, next_frame: np.ndarray) -> np.ndarray:
        key = prev_frame.tobytes() + next_frame.tobytes()
        if key not in self._middles:
            raise BackendError("frame pair not in memorized sequence")
        return self._middles[key]


class ShiftBlendInterpolator(InterpolatorBackend):
    """Global-shift estimate plus half-shift blending.

    Mimics flow-based middle-frame prediction on camera pans: the
    background reconstructs exactly while independently moving objects
    leave ghosting near their boundaries.
    """

    def __init__(self, max_shift: int = 8):
        self.max_shift = max_shift

    def _estimate_shift(self, a: np.ndarray, b: np.ndarray) -> tuple[int, int]:
        ga = a.astype(np.float32).mean(axis=2)
        gb = b.astype(np.float32).mean(axis=2)
        best, best_cost = (0, 0), np.inf
        r = self.max_shift
        for sy in range(-r, r + 1):
            for sx in range(-r, r + 1):
                cost = np.abs(np.roll(ga, shift=(sy, sx), axis=(0, 1)) - gb).sum()
                if cost < best_cost:
                    best, best_cost = (sx, sy), cost
        return best

    def predict_middle(self, prev_frame: np.ndarray, next_frame: np.ndarray) -> np.ndarray:
        sx, sy = self._estimate_shift(prev_frame, next_frame)
        hx, hy = sx // 2, sy // 2
        a = np.roll(prev_frame, shift=(hy, hx), axis=(0, 1)).astype(np.float32)
        b = np.roll(next_frame, shift=(hy - sy, hx - sx), axis=(0, 1)).astype(np.float32)
        return np.clip(0.5 * a + 0.5 * b, 0, 255).astype(np.uint8)


class OracleAutoMasker(AutoMaskerBackend):
    def __init__(self, scene: SyntheticScene, num_frames: int, h: int, w: int):
        self.scene, self.num_frames, self.h, self.w = scene, num_frames, h, w

    def auto_masks(self, frames: FrameSequence) -> list[list[np.ndarray]]:
        return oracle_masks(self.scene, self.num_frames, self.h, self.w)


class OracleGrounder(GrounderBackend):
    """Grounds phrase k to sprite k's bounding box at the reference frame."""

    def __init__(self, scene: SyntheticScene, h: int, w: int, reference_frame: int = 0):
        self.scene, self.h, self.w = scene, h, w
        self.reference_frame = reference_frame

    def ground(self, frame: np.ndarray, phrases: list[str]):
        out: dict[str, list[tuple[tuple[int, int, int, int], float]]] = {}
        for k, phrase in enumerate(phrases):
            if k >= len(self.scene.sprites):
                out[phrase] = []
                continue
            raster = sprite_raster(
                self.scene.sprites[k], self.reference_frame, self.h, self.w
            )
            ys, xs = np.nonzero(raster)
            if len(xs) == 0:
                out[phrase] = []
                continue
            box = (int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)
            out[phrase] = [(box, 1.0)]
        return out


class OracleMaskPropagator(MaskPropagatorBackend):
    """Propagates each initial box to the best-overlapping sprite's rasters."""

    def __init__(self, scene: SyntheticScene, num_frames: int, h: int, w: int):
        self.scene, self.num_frames, self.h, self.w = scene, num_frames, h, w

    def propagate(self, frames: FrameSequence, initial_boxes):
        all_masks = oracle_masks(self.scene, self.num_frames, self.h, self.w)
        out = []
        for box in initial_boxes:
            x0, y0, x1, y1 = box
            box_mask = np.zeros((self.h, self.w), dtype=bool)
            box_mask[y0:y1, x0:x1] = True
            best_n, best_overlap = None, 0
            for n, per_frame in enumerate(all_masks):
                overlap = int((per_frame[0].astype(bool) & box_mask).sum())
                if overlap > best_overlap:
                    best_n, best_overlap = n, overlap
            if best_n is None:
                out.append(
                    [np.zeros((self.h, self.w), dtype=np.uint8)] * self.num_frames
                )
            else:
                out.append(all_masks[best_n])
        return out


class OracleTracker(PointTrackerBackend):
    def __init__(self, scene: SyntheticScene, num_frames: int, h: int, w: int):
        self.scene, self.num_frames, self.h, self.w = scene, num_frames, h, w

    def track(self, frames: FrameSequence, queries: np.ndarray, start_frame: int = 0) -> TrackSet:
        return oracle_tracks(
            self.scene, queries, self.num_frames, self.h, self.w, start_frame
        )


class DownsampleEmbedder(EmbedderBackend):
    """Content-derived unit embedding: normalized 8x8 grayscale thumbnail."""

    def __init__(self, grid: int = 8):
        self.grid = grid

    def embed(self, frame: np.ndarray) -> np.ndarray:
        import cv2

        gray = frame.astype(np.float32).mean(axis=2)
        thumb = cv2.resize(gray, (self.grid, self.grid), interpolation=cv2.INTER_AREA)
        v = thumb.reshape(-1) + 1.0
        return v / np.linalg.norm(v)


class PresetEmbedder(EmbedderBackend):
    """Serves fixed unit vectors keyed by frame bytes."""

    def __init__(self, mapping: dict[bytes, np.ndarray]):
        self.mapping = mapping

    def embed(self, frame: np.ndarray) -> np.ndarray:
        key = np.ascontiguousarray(frame).tobytes()
        if key not in self.mapping:
            raise BackendError("no preset embedding for frame")
        return self.mapping[key]


class TablePhraseExtractor(PhraseExtractorBackend):
    """Phrase extraction from a fixed prompt -> phrase table."""

    def __init__(self, table: dict[str, list[tuple[str, str]]]):
        self.table = table

    def extract(self, prompt_text: str) -> list[tuple[str, str]]:
        if prompt_text not in self.table:
            raise BackendError(f"no phrase entry for prompt: {prompt_text!r}")
        return self.table[prompt_text]
