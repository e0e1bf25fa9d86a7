"""Ground-truth heatmap emission: Gaussian splats for point fiducials and
Gaussian-profile strokes for curves, max-composited per category."""

from __future__ import annotations

import math

import numpy as np

from ..categories import (
    HEATMAP_CATEGORIES,
    HM_BAR_CORNER_BL,
    HM_BAR_CORNER_BR,
    HM_BAR_CORNER_TL,
    HM_BAR_CORNER_TR,
    HM_LINE_KNEE,
    HM_LINE_STROKE,
    HM_PIE_CENTER,
    HM_PIE_CIRCUMFERENCE,
    HM_PIE_RADIAL,
    HM_PIE_SECTOR_CORNER,
    HM_SCATTER_DOT,
    HM_X_TICK,
    HM_Y_TICK,
)
from ..raster import Heatmap
from .gt import GroundTruth


def _grid(res: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:res, 0:res]
    return xs.astype(np.float64), ys.astype(np.float64)


def _splat(acc: np.ndarray, xs, ys, cx: float, cy: float, sigma: float) -> None:
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    np.maximum(acc, np.exp(-d2 / (2.0 * sigma * sigma)), out=acc)


def _segment(acc: np.ndarray, xs, ys, a: tuple[float, float], b: tuple[float, float],
             sigma: float) -> None:
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 <= 1e-12:
        _splat(acc, xs, ys, ax, ay, sigma)
        return
    t = np.clip(((xs - ax) * vx + (ys - ay) * vy) / L2, 0.0, 1.0)
    d2 = (xs - (ax + t * vx)) ** 2 + (ys - (ay + t * vy)) ** 2
    np.maximum(acc, np.exp(-d2 / (2.0 * sigma * sigma)), out=acc)


def _ring(acc: np.ndarray, xs, ys, cx: float, cy: float, r: float, sigma: float) -> None:
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    np.maximum(acc, np.exp(-((d - r) ** 2) / (2.0 * sigma * sigma)), out=acc)


def emit_heatmaps(gt: GroundTruth, resolution: int = 128, sigma: float = 2.0) -> dict[str, Heatmap]:
    """One heatmap per supported category; categories absent from the chart
    come back as all-zero maps. `sigma` is in heatmap pixels."""
    if gt.canvas_size % resolution != 0:
        raise ValueError("resolution must divide the canvas size")
    scale = gt.canvas_size / resolution
    xs, ys = _grid(resolution)
    acc = {cat: np.zeros((resolution, resolution), dtype=np.float64) for cat in HEATMAP_CATEGORIES}

    def sc(p: tuple[float, float]) -> tuple[float, float]:
        return p[0] / scale, p[1] / scale

    for bar in gt.bars:
        b = bar.box
        for cat, (x, y) in (
            (HM_BAR_CORNER_TL, (b.x_min, b.y_min)),
            (HM_BAR_CORNER_TR, (b.x_max, b.y_min)),
            (HM_BAR_CORNER_BL, (b.x_min, b.y_max)),
            (HM_BAR_CORNER_BR, (b.x_max, b.y_max)),
        ):
            cxp, cyp = sc((x, y))
            _splat(acc[cat], xs, ys, cxp, cyp, sigma)

    for t in gt.ticks:
        if gt.plot_rect is None:
            continue
        if t.axis == "x":
            cxp, cyp = sc((t.pixel, gt.plot_rect.y_max))
            _splat(acc[HM_X_TICK], xs, ys, cxp, cyp, sigma)
        else:
            cxp, cyp = sc((gt.plot_rect.x_min, t.pixel))
            _splat(acc[HM_Y_TICK], xs, ys, cxp, cyp, sigma)

    for pie in gt.pies:
        cxp, cyp = sc(pie.center)
        r = pie.radius / scale
        _splat(acc[HM_PIE_CENTER], xs, ys, cxp, cyp, sigma)
        _ring(acc[HM_PIE_CIRCUMFERENCE], xs, ys, cxp, cyp, r, sigma)
        boundaries = {round(s.start_angle % 360.0, 6) for s in pie.sectors}
        if len(pie.sectors) > 1:
            for ang in sorted(boundaries):
                rad = math.radians(ang)
                tip = (cxp + r * math.cos(rad), cyp + r * math.sin(rad))
                _segment(acc[HM_PIE_RADIAL], xs, ys, (cxp, cyp), tip, sigma)
                _splat(acc[HM_PIE_SECTOR_CORNER], xs, ys, tip[0], tip[1], sigma)

    for line in gt.lines:
        pts = [sc(v) for v in line.vertices]
        for v in pts:
            _splat(acc[HM_LINE_KNEE], xs, ys, v[0], v[1], sigma)
        for a, b in zip(pts, pts[1:]):
            _segment(acc[HM_LINE_STROKE], xs, ys, a, b, sigma)

    for p in gt.scatter_points:
        cxp, cyp = sc(p)
        _splat(acc[HM_SCATTER_DOT], xs, ys, cxp, cyp, sigma)

    return {cat: Heatmap(vals, cat) for cat, vals in acc.items()}
