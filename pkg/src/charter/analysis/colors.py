"""Small color/raster helpers shared by the per-type extractors."""

from __future__ import annotations

import numpy as np

from ..geometry import BBox
from ..raster import Raster


def estimate_background(raster: Raster) -> np.ndarray:
    """Dominant color of the canvas corners (the chart background)."""
    a = raster.array
    k = 12
    patches = np.concatenate([
        a[:k, :k].reshape(-1, 3),
        a[:k, -k:].reshape(-1, 3),
        a[-k:, :k].reshape(-1, 3),
        a[-k:, -k:].reshape(-1, 3),
    ])
    colors, counts = np.unique(patches, axis=0, return_counts=True)
    return colors[int(np.argmax(counts))].astype(np.float64)


def region_median_color(raster: Raster, box: BBox, inset: float = 3.0) -> np.ndarray | None:
    x0 = int(max(0, np.floor(box.x_min + inset)))
    y0 = int(max(0, np.floor(box.y_min + inset)))
    x1 = int(min(raster.width, np.ceil(box.x_max - inset)))
    y1 = int(min(raster.height, np.ceil(box.y_max - inset)))
    if x1 <= x0 or y1 <= y0:
        return None
    patch = raster.array[y0:y1, x0:x1].reshape(-1, 3)
    return np.median(patch, axis=0)


def box_mask(shape: tuple[int, int], boxes, inflate: float = 0.0) -> np.ndarray:
    """Boolean mask of all pixels covered by the given boxes."""
    m = np.zeros(shape, dtype=bool)
    h, w = shape
    for b in boxes:
        x0 = int(np.clip(np.floor(b.x_min - inflate), 0, w))
        x1 = int(np.clip(np.ceil(b.x_max + inflate), 0, w))
        y0 = int(np.clip(np.floor(b.y_min - inflate), 0, h))
        y1 = int(np.clip(np.ceil(b.y_max + inflate), 0, h))
        m[y0:y1, x0:x1] = True
    return m
