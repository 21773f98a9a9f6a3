"""Binary morphology with square structuring elements."""

from __future__ import annotations

import numpy as np
from scipy import ndimage


def _square(kernel: int) -> np.ndarray:
    if kernel < 3 or kernel % 2 == 0:
        raise ValueError(f"kernel must be an odd integer >= 3, got {kernel}")
    return np.ones((kernel, kernel), dtype=bool)


def dilate(mask: np.ndarray, kernel: int, iterations: int = 1) -> np.ndarray:
    out = ndimage.binary_dilation(
        mask.astype(bool), structure=_square(kernel), iterations=iterations
    )
    return out.astype(np.uint8)


def erode(mask: np.ndarray, kernel: int, iterations: int = 1) -> np.ndarray:
    out = ndimage.binary_erosion(
        mask.astype(bool), structure=_square(kernel), iterations=iterations
    )
    return out.astype(np.uint8)


def morphological_gradient(mask: np.ndarray, kernel: int) -> np.ndarray:
    """Dilation minus erosion: the boundary band of a binary mask."""
    return (dilate(mask, kernel) & ~erode(mask, kernel).astype(bool)).astype(np.uint8)
