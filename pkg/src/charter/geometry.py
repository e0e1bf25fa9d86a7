"""Geometry primitives: boxes, points, peak decoding, components, morphology."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .raster import Heatmap

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    intensity: float | None = None


@dataclass(frozen=True)
class Polyline:
    points: tuple[Point, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("polyline needs at least 2 points")
        for a, b in zip(self.points, self.points[1:]):
            if a.x == b.x and a.y == b.y:
                raise ValueError("consecutive polyline points must be distinct")


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    category: str = ""
    score: float = 1.0

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self}")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score out of range: {self.score}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Point:
        return Point((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two boxes; disjoint boxes give 0."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def local_maxima(
    h: Heatmap,
    threshold: float = 0.3,
    min_distance: int = 4,
) -> list[Point]:
    """Peaks of a heatmap: value >= threshold and maximal in the
    (2*min_distance+1)^2 neighborhood, with no two returned peaks closer
    than min_distance. Sorted by descending intensity."""
    if not (0.0 < threshold <= 1.0):
        raise ValueError("threshold must be in (0, 1]")
    vals = h.values
    if vals.size == 0:
        return []
    size = 2 * min_distance + 1
    maxed = ndimage.maximum_filter(vals, size=size, mode="constant", cval=0.0)
    cand = (vals >= threshold) & (vals >= maxed)
    ys, xs = np.nonzero(cand)
    if ys.size == 0:
        return []
    inten = vals[ys, xs]
    order = np.lexsort((xs, ys, -inten))
    kept: list[Point] = []
    kept_xy: list[tuple[int, int]] = []
    for i in order:
        x, y = int(xs[i]), int(ys[i])
        ok = True
        for kx, ky in kept_xy:
            if max(abs(kx - x), abs(ky - y)) < min_distance:
                ok = False
                break
        if ok:
            kept.append(Point(float(x), float(y), float(inten[i])))
            kept_xy.append((x, y))
    return kept


def refine_peak(h: Heatmap, p: Point, window: int = 2) -> Point:
    """Sub-pixel peak position. Per axis, a log-parabolic 3-point fit (exact
    for sampled gaussians); center-of-mass over the window as a fallback
    where the log fit is undefined."""
    vals = h.values
    x0, y0 = int(round(p.x)), int(round(p.y))
    x0 = min(max(x0, 0), h.width - 1)
    y0 = min(max(y0, 0), h.height - 1)

    def _log_offset(vm: float, v0: float, vp: float) -> float | None:
        if min(vm, v0, vp) <= 0 or v0 < vm or v0 < vp:
            return None
        lm, l0, lp = math.log(vm), math.log(v0), math.log(vp)
        denom = lm - 2.0 * l0 + lp
        if denom >= -1e-12:
            return None
        off = 0.5 * (lm - lp) / denom
        return off if abs(off) <= 1.0 else None

    dx = dy = None
    if 1 <= x0 <= h.width - 2:
        dx = _log_offset(float(vals[y0, x0 - 1]), float(vals[y0, x0]), float(vals[y0, x0 + 1]))
    if 1 <= y0 <= h.height - 2:
        dy = _log_offset(float(vals[y0 - 1, x0]), float(vals[y0, x0]), float(vals[y0 + 1, x0]))
    if dx is not None and dy is not None:
        return Point(x0 + dx, y0 + dy, p.intensity)

    xs = slice(max(0, x0 - window), min(h.width, x0 + window + 1))
    ys = slice(max(0, y0 - window), min(h.height, y0 + window + 1))
    patch = vals[ys, xs].astype(np.float64)
    total = patch.sum()
    if total <= 0:
        return p
    gy, gx = np.mgrid[ys, xs]
    cx = float((gx * patch).sum() / total)
    cy = float((gy * patch).sum() / total)
    return Point(cx if dx is None else x0 + dx, cy if dy is None else y0 + dy, p.intensity)


@dataclass(frozen=True)
class Component:
    """One 8-connected foreground component of a binary mask."""

    area: int
    bbox: BBox
    ys: np.ndarray = field(repr=False)
    xs: np.ndarray = field(repr=False)

    def mask(self, height: int, width: int) -> np.ndarray:
        m = np.zeros((height, width), dtype=bool)
        m[self.ys, self.xs] = True
        return m


def connected_components(mask: np.ndarray) -> list[Component]:
    """8-connectivity partition of the foreground, ordered by label."""
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=EIGHT_CONNECTED)
    out: list[Component] = []
    if n == 0:
        return out
    slices = ndimage.find_objects(labels)
    for i, sl in enumerate(slices, start=1):
        ys, xs = np.nonzero(labels[sl] == i)
        ys = ys + sl[0].start
        xs = xs + sl[1].start
        bbox = BBox(
            float(xs.min()), float(ys.min()), float(xs.max() + 1), float(ys.max() + 1),
            category="component",
        )
        out.append(Component(area=int(ys.size), bbox=bbox, ys=ys, xs=xs))
    return out


def morphology(mask: np.ndarray, op: str, radius: int = 1) -> np.ndarray:
    """Binary morphology with a square (2r+1)x(2r+1) structuring element."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    mask = np.asarray(mask, dtype=bool)
    selem = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    if op == "dilate":
        return ndimage.binary_dilation(mask, structure=selem)
    if op == "erode":
        return ndimage.binary_erosion(mask, structure=selem)
    if op == "open":
        return ndimage.binary_opening(mask, structure=selem)
    if op == "close":
        return ndimage.binary_closing(mask, structure=selem)
    raise ValueError(f"unknown morphology op: {op!r}")
