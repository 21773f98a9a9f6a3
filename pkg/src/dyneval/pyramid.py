"""Gaussian pyramid: 5-tap binomial blur followed by 2x decimation."""

from __future__ import annotations

import numpy as np

_BINOMIAL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def binomial_blur(img: np.ndarray) -> np.ndarray:
    """Separable (1,4,6,4,1)/16 blur over the two leading axes."""
    out = img.astype(np.float64)
    for axis in (0, 1):
        padded = np.pad(
            out,
            [(2, 2) if a == axis else (0, 0) for a in range(out.ndim)],
            mode="reflect",
        )
        acc = np.zeros_like(out)
        for k, wgt in enumerate(_BINOMIAL):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(k, k + out.shape[axis])
            acc += wgt * padded[tuple(sl)]
        out = acc
    return out


def downscale(img: np.ndarray) -> np.ndarray:
    """Blur then keep every second sample along both spatial axes."""
    return binomial_blur(img)[::2, ::2]


def downscale_frames(frames: np.ndarray) -> np.ndarray:
    """Downscale a (F, H, W[, C]) stack one level, back to uint8."""
    out = np.stack([downscale(f) for f in frames])
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def downscale_mask(mask: np.ndarray) -> np.ndarray:
    """Downscale a {0,1} raster one level; threshold 0.5 keeps a pixel."""
    return (downscale(mask.astype(np.float64)) >= 0.5).astype(np.uint8)


def feasible_levels(h: int, w: int, requested: int, min_dim: int = 8) -> int:
    """Largest level count <= requested with min(H, W) >= min_dim at the top."""
    levels = 1
    size = min(h, w)
    while levels < requested and size // 2 >= min_dim:
        size //= 2
        levels += 1
    return levels


def frame_pyramid(frames: np.ndarray, levels: int) -> list[np.ndarray]:
    """Pyramid of frame stacks, full resolution first."""
    out = [frames]
    for _ in range(1, levels):
        out.append(downscale_frames(out[-1]))
    return out


def mask_pyramid(mask: np.ndarray, levels: int) -> list[np.ndarray]:
    """Pyramid of one binary raster, full resolution first."""
    out = [mask.astype(np.uint8)]
    for _ in range(1, levels):
        out.append(downscale_mask(out[-1]))
    return out
