"""Pie analysis: center/radius recovery by radius voting on the
circumference heatmap, sector boundaries from the radial-line and
sector-corner heatmaps, label assignment, and the box-only baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..categories import BOX_PIE_SECTOR, HM_PIE_CENTER, HM_PIE_CIRCUMFERENCE
from ..geometry import BBox, Point, connected_components, local_maxima, refine_peak
from ..oracle import OcrOutput
from ..raster import Heatmap, Raster
from ..table import PROV_ADJACENT, PROV_CONNECTOR, PROV_LEGEND
from .bars import match_legend
from .colors import box_mask, estimate_background
from .config import DEFAULT_ANALYSIS_CONFIG, AnalysisConfig


@dataclass(frozen=True)
class Sector:
    start_angle: float  # degrees, image convention, [0, 360)
    end_angle: float  # start + span
    color: tuple[int, int, int] | None = None

    @property
    def span(self) -> float:
        return self.end_angle - self.start_angle

    def contains_angle(self, ang: float) -> bool:
        rel = (ang - self.start_angle) % 360.0
        return rel < self.span + 1e-9


@dataclass(frozen=True)
class PieGeometry:
    center: Point
    radius: float
    sectors: tuple[Sector, ...] = ()

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("pie radius must be positive")
        if self.sectors:
            total = sum(s.span for s in self.sectors)
            if abs(total - 360.0) > 0.5:
                raise ValueError(f"sector spans sum to {total}, expected 360 +/- 0.5")
            if any(s.span <= 0 for s in self.sectors):
                raise ValueError("sector spans must be positive")


def fit_pies(
    heatmaps: dict[str, Heatmap],
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
    scale: float = 1.0,
) -> list[PieGeometry]:
    """Centers and radii of every pie supported by the center/circumference
    heatmaps. Coordinates are multiplied by `scale` on output (pass the
    raster/heatmap ratio to get raster coordinates)."""
    center_hm = heatmaps.get(HM_PIE_CENTER)
    circ_hm = heatmaps.get(HM_PIE_CIRCUMFERENCE)
    if center_hm is None or circ_hm is None:
        return []
    peaks = local_maxima(center_hm, config.heatmap_threshold, max(config.peak_min_distance, 8))
    if not peaks:
        return []
    vals = circ_hm.values.astype(np.float64)
    h, w = vals.shape
    ys, xs = np.mgrid[0:h, 0:w]
    r_max = min(w, h) / 2.0
    band = config.pie_ring_band

    out: list[tuple[PieGeometry, float]] = []
    for peak in peaks:
        p = refine_peak(center_hm, peak)
        cx, cy = p.x, p.y
        r = None
        for _ in range(2):  # vote, refine the center once, re-vote
            d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
            r = _vote_radius(d, vals, config.pie_min_radius, r_max, band)
            if r is None:
                break
            ring = np.abs(d - r) <= band
            wsum = vals[ring].sum()
            if wsum <= 0:
                r = None
                break
            cx = float((xs[ring] * vals[ring]).sum() / wsum)
            cy = float((ys[ring] * vals[ring]).sum() / wsum)
        if r is None:
            continue
        # polish with a weighted algebraic circle fit on the ring band
        for _ in range(3):
            d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
            sel = (vals > 0.02) & (np.abs(d - r) < 3.0 * band)
            fit = _circle_fit(vals, xs, ys, sel)
            if fit is None:
                break
            cx, cy, r = fit
        d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
        ring = np.abs(d - r) <= band
        ring_sum = float(vals[ring].sum())
        if ring_sum < config.pie_circumference_min_fraction * 2.0 * math.pi * r:
            continue  # not enough circumference evidence: false positive
        out.append((PieGeometry(Point(cx * scale, cy * scale), r * scale), ring_sum))

    # de-duplicate overlapping detections, strongest ring first
    out.sort(key=lambda t: -t[1])
    final: list[PieGeometry] = []
    for geom, _ in out:
        if all(math.hypot(geom.center.x - g.center.x, geom.center.y - g.center.y)
               > 0.5 * min(geom.radius, g.radius) for g in final):
            final.append(geom)
    return final


def _circle_fit(vals: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                sel: np.ndarray) -> tuple[float, float, float] | None:
    """Weighted algebraic (Kasa) circle fit; the ring's gaussian profile is
    radially symmetric, so the fit lands on the true center."""
    if int(sel.sum()) < 8:
        return None
    w = vals[sel]
    x = xs[sel].astype(np.float64)
    y = ys[sel].astype(np.float64)
    a = np.stack([x, y, np.ones_like(x)], axis=1)
    b = x * x + y * y
    try:
        sol, *_ = np.linalg.lstsq(a * w[:, None], b * w, rcond=None)
    except np.linalg.LinAlgError:
        return None
    cx, cy = float(sol[0]) / 2.0, float(sol[1]) / 2.0
    r2 = float(sol[2]) + cx * cx + cy * cy
    if r2 <= 0:
        return None
    return cx, cy, math.sqrt(r2)


def _vote_radius(d: np.ndarray, vals: np.ndarray, r_min: float, r_max: float,
                 band: float) -> float | None:
    """1-px-bin radius voting; each pixel votes with its circumference
    intensity, density-corrected by 1/distance so the vote histogram peaks
    at the true radius."""
    sel = (vals > 1e-4) & (d >= 1.0)
    if not np.any(sel):
        return None
    dv = d[sel]
    wv = vals[sel] / dv
    bins = np.round(dv).astype(int)
    hist = np.bincount(bins, weights=wv, minlength=int(r_max) + 2)
    lo = int(max(1, math.floor(r_min)))
    hi = int(r_max)
    if hi <= lo:
        return None
    k = lo + int(np.argmax(hist[lo:hi + 1]))
    if hist[k] <= 0:
        return None
    near = np.abs(dv - k) <= band
    if not np.any(near):
        return None
    return float(np.sum(dv[near] * wv[near]) / np.sum(wv[near]))


def extract_sectors(
    geom: PieGeometry,
    radial_hm: Heatmap | None,
    corner_hm: Heatmap | None,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
    scale: float = 1.0,
) -> list[Sector]:
    """Sector boundary angles from the radial-line heatmap, corroborated and
    refined by sector-corner peaks. `geom` must be in output coordinates;
    `scale` maps heatmap pixels to those coordinates."""
    cx, cy = geom.center.x / scale, geom.center.y / scale
    r = geom.radius / scale

    hist = np.zeros(360, dtype=np.float64)
    if radial_hm is not None:
        vals = radial_hm.values.astype(np.float64)
        h, w = vals.shape
        ys, xs = np.mgrid[0:h, 0:w]
        d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
        sel = (d >= 0.2 * r) & (d <= 1.02 * r) & (vals > 1e-4)
        if np.any(sel):
            ang = np.degrees(np.arctan2(ys[sel] - cy, xs[sel] - cx)) % 360.0
            # weight by intensity/d: every boundary ray gets equal total mass
            np.add.at(hist, np.floor(ang).astype(int) % 360, vals[sel] / np.maximum(d[sel], 1.0))

    boundaries: list[float] = []
    if hist.max() > 0:
        thresh = config.sector_peak_fraction * hist.max()
        hot = hist >= thresh
        for group in _circular_groups(np.nonzero(hot)[0], config.sector_merge_deg):
            angs = np.array(group, dtype=np.float64) + 0.5
            wts = hist[np.array(group) % 360]
            boundaries.append(_circular_mean(angs, wts))

    corner_angles: list[float] = []
    if corner_hm is not None:
        for p in local_maxima(corner_hm, config.heatmap_threshold, config.peak_min_distance):
            rp = refine_peak(corner_hm, p)
            dist = math.hypot(rp.x - cx, rp.y - cy)
            if abs(dist - r) <= max(3.0, 0.15 * r):
                corner_angles.append(math.degrees(math.atan2(rp.y - cy, rp.x - cx)) % 360.0)

    # Corner peaks (points, cleanly separable) are authoritative where they
    # exist; radial-only boundaries are refined against the ribbon and must
    # carry real ribbon mass — the angular histogram's 1-degree bins can
    # hallucinate a neighbor next to a genuine boundary.
    corner_angles = _merge_close_angles(sorted(corner_angles), config.sector_merge_deg)
    merged: list[float] = list(corner_angles)
    anchors = corner_angles + boundaries
    # near a corner the ribbon's shoulder still carries mass, so radial-only
    # candidates need a wider exclusion zone than the generic merge window
    suppress = 2.0 * config.sector_merge_deg
    for b in boundaries:
        if any(_ang_diff(b, ca) <= suppress for ca in corner_angles):
            continue
        if radial_hm is not None:
            vals = radial_hm.values.astype(np.float64)
            gap = min((_ang_diff(b, a) for a in anchors if _ang_diff(b, a) > 1e-9),
                      default=360.0)
            b = _refine_boundary(b, vals, cx, cy, r, min(8.0, 0.45 * max(gap, 2.0)))
            if any(_ang_diff(b, ca) <= suppress for ca in merged):
                continue
            if _ray_mass(vals, cx, cy, r, b) < 0.4:
                continue
        merged.append(b)

    merged = _merge_close_angles(sorted(a % 360.0 for a in merged), config.sector_merge_deg)
    if len(merged) < 2:
        return [Sector(0.0, 360.0)]
    merged.sort()
    sectors: list[Sector] = []
    for i, a in enumerate(merged):
        b = merged[(i + 1) % len(merged)]
        span = (b - a) % 360.0
        if span == 0.0:
            span = 360.0
        sectors.append(Sector(a, a + span))
    total = sum(s.span for s in sectors)
    if abs(total - 360.0) > 1e-9:  # enforce, not assume
        scale_f = 360.0 / total
        fixed = []
        for s in sectors:
            fixed.append(Sector(s.start_angle, s.start_angle + s.span * scale_f, s.color))
        sectors = fixed
    return sectors


def _ray_mass(vals: np.ndarray, cx: float, cy: float, r: float, angle: float) -> float:
    """Mean ribbon intensity along a candidate boundary ray; ~1 on a real
    radial line, near 0 on a histogram artifact."""
    th = math.radians(angle)
    n = max(int(0.6 * r), 4)
    t = np.linspace(0.3 * r, 0.9 * r, n)
    px = np.clip(np.round(cx + t * math.cos(th)).astype(int), 0, vals.shape[1] - 1)
    py = np.clip(np.round(cy + t * math.sin(th)).astype(int), 0, vals.shape[0] - 1)
    return float(vals[py, px].mean())


def _refine_boundary(angle: float, vals: np.ndarray, cx: float, cy: float,
                     r: float, ang_window: float = 8.0) -> float:
    """Sub-degree boundary refinement: least-squares fit of the radial
    ribbon's perpendicular offset as a linear function of distance along
    the ray, iterated to a fixed point. `ang_window` (degrees) keeps the
    neighboring boundaries' ribbons out of the fit near the center."""
    h, w = vals.shape
    ys, xs = np.mgrid[0:h, 0:w]
    dx = xs - cx
    dy = ys - cy
    tan_w = math.tan(math.radians(max(ang_window, 1.0)))
    a = angle
    for _ in range(4):
        th = math.radians(a)
        ux, uy = math.cos(th), math.sin(th)
        along = dx * ux + dy * uy
        perp = -dx * uy + dy * ux
        sel = ((along > 0.25 * r) & (along < 0.95 * r) & (vals > 0.01)
               & (np.abs(perp) < np.minimum(5.0, along * tan_w)))
        denom = float(np.sum(vals[sel] * along[sel] ** 2))
        if denom <= 0:
            return angle
        delta = float(np.sum(vals[sel] * perp[sel] * along[sel])) / denom
        a += math.degrees(math.atan(delta))
    return a % 360.0


def _ang_diff(a: float, b: float) -> float:
    return abs((a - b + 180.0) % 360.0 - 180.0)


def _circular_groups(indices: np.ndarray, merge_deg: float) -> list[list[int]]:
    """Group histogram bin indices that are circularly within merge_deg."""
    if indices.size == 0:
        return []
    idx = sorted(int(i) for i in indices)
    groups: list[list[int]] = [[idx[0]]]
    for i in idx[1:]:
        if i - groups[-1][-1] <= merge_deg:
            groups[-1].append(i)
        else:
            groups.append([i])
    # wrap-around merge
    if len(groups) > 1 and (idx[0] + 360 - idx[-1]) <= merge_deg:
        head = groups.pop(0)
        groups[-1].extend(i + 360 for i in head)
    return groups


def _circular_mean(angles_deg: np.ndarray, weights: np.ndarray) -> float:
    rad = np.radians(angles_deg)
    s = float(np.sum(weights * np.sin(rad)))
    c = float(np.sum(weights * np.cos(rad)))
    return math.degrees(math.atan2(s, c)) % 360.0


def _merge_close_angles(angles: list[float], merge_deg: float) -> list[float]:
    if not angles:
        return []
    out: list[list[float]] = [[angles[0]]]
    for a in angles[1:]:
        if a - out[-1][-1] <= merge_deg:
            out[-1].append(a)
        else:
            out.append([a])
    if len(out) > 1 and (angles[0] + 360.0 - angles[-1]) <= merge_deg:
        head = out.pop(0)
        out[-1].extend(a + 360.0 for a in head)
    return [float(np.mean(g)) % 360.0 for g in out]


def sector_colors(geom: PieGeometry, raster: Raster) -> list[np.ndarray]:
    """Mean interior color per sector, sampled on a small polar grid."""
    out = []
    for s in geom.sectors:
        samples = []
        for fr in (0.35, 0.5, 0.65, 0.8):
            for frac in (0.3, 0.5, 0.7):
                ang = math.radians(s.start_angle + frac * s.span)
                x = int(round(geom.center.x + fr * geom.radius * math.cos(ang)))
                y = int(round(geom.center.y + fr * geom.radius * math.sin(ang)))
                if 0 <= x < raster.width and 0 <= y < raster.height:
                    samples.append(raster.array[y, x])
        out.append(np.median(np.array(samples, dtype=np.float64), axis=0)
                   if samples else np.zeros(3))
    return out


def label_sectors(
    geom: PieGeometry,
    raster: Raster,
    ocr: OcrOutput,
    legend_box: BBox | None,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> list[tuple[str, str]]:
    """(label, provenance) per sector. Strategies are strictly ordered:
    legend color matching, then connector strokes, then angular text
    containment; never mixed within one pie."""
    n = len(geom.sectors)
    colors = sector_colors(geom, raster)

    if legend_box is not None:
        assign = match_legend(legend_box, ocr, colors, raster, config)
        return [(assign.get(i, f"sector_{i}"),
                 PROV_LEGEND if i in assign else PROV_ADJACENT) for i in range(n)]

    connectors = _find_connectors(geom, raster, ocr, config)
    if connectors:
        labels: list[tuple[str, str]] = []
        for i, s in enumerate(geom.sectors):
            hit = next((text for ang, text in connectors if s.contains_angle(ang)), None)
            if hit is not None:
                labels.append((hit, PROV_CONNECTOR))
            else:
                labels.append((f"sector_{i}", PROV_CONNECTOR))
        return labels

    return _adjacent_labels(geom, ocr, config)


def _find_connectors(geom: PieGeometry, raster: Raster, ocr: OcrOutput,
                     config: AnalysisConfig) -> list[tuple[float, str]]:
    """Thin strokes leading out of the disc; returns (crossing angle, label
    text of the token at the outer end)."""
    cx, cy, r = geom.center.x, geom.center.y, geom.radius
    a = raster.array.astype(np.float64)
    bg = estimate_background(raster)
    fg = np.linalg.norm(a - bg, axis=2) > config.background_color_distance
    fg &= ~box_mask(fg.shape, [t.box for t in ocr.tokens], inflate=2.0)
    h, w = fg.shape
    ys, xs = np.mgrid[0:h, 0:w]
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    fg &= d > r + 2.0  # outside the outlined disc
    fg &= d < 1.6 * r

    out: list[tuple[float, str]] = []
    max_area = config.connector_max_area_fraction * math.pi * r * r
    for comp in connected_components(fg):
        if comp.area > max_area or comp.area < 3:
            continue
        dists = np.sqrt((comp.xs - cx) ** 2 + (comp.ys - cy) ** 2)
        if dists.min() > r + 5.0 or dists.max() < r + 9.0:
            continue  # does not bridge the pie edge outward
        j_in = int(np.argmin(dists))
        j_out = int(np.argmax(dists))
        cross_ang = math.degrees(math.atan2(comp.ys[j_in] - cy, comp.xs[j_in] - cx)) % 360.0
        ox, oy = float(comp.xs[j_out]), float(comp.ys[j_out])
        tok = min(
            (t for t in ocr.tokens),
            key=lambda t: _point_box_distance(ox, oy, t.box),
            default=None,
        )
        if tok is None or _point_box_distance(ox, oy, tok.box) > 0.4 * r:
            continue
        out.append((cross_ang, tok.text))
    return out


def _point_box_distance(x: float, y: float, b: BBox) -> float:
    dx = max(b.x_min - x, 0.0, x - b.x_max)
    dy = max(b.y_min - y, 0.0, y - b.y_max)
    return math.hypot(dx, dy)


def _adjacent_labels(geom: PieGeometry, ocr: OcrOutput,
                     config: AnalysisConfig) -> list[tuple[str, str]]:
    cx, cy, r = geom.center.x, geom.center.y, geom.radius
    cands = []
    for tok in ocr.tokens:
        c = tok.box.center
        dist = math.hypot(c.x - cx, c.y - cy)
        if dist > 1.5 * r:
            continue
        ang = math.degrees(math.atan2(c.y - cy, c.x - cx)) % 360.0
        cands.append((dist <= r, dist, ang, tok.text))

    labels: list[tuple[str, str]] = []
    taken: set[int] = set()
    for i, s in enumerate(geom.sectors):
        best = None
        for j, (inside, dist, ang, text) in enumerate(cands):
            if j in taken or not s.contains_angle(ang):
                continue
            key = (0 if inside else 1, dist)
            if best is None or key < best[0]:
                best = (key, j, text)
        if best is not None:
            taken.add(best[1])
            labels.append((best[2], PROV_ADJACENT))
        else:
            labels.append((f"sector_{i}", PROV_ADJACENT))
    return labels


def pie_from_boxes(
    boxes,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> PieGeometry | None:
    """Box-only ablation baseline: pie circle inscribed in the union of the
    accepted sector boxes; boundaries where box edges cut the circle."""
    accepted = [b for b in boxes
                if b.category == BOX_PIE_SECTOR and b.score >= config.box_score_threshold]
    if not accepted:
        return None
    x0 = min(b.x_min for b in accepted)
    y0 = min(b.y_min for b in accepted)
    x1 = max(b.x_max for b in accepted)
    y1 = max(b.y_max for b in accepted)
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    r = min(x1 - x0, y1 - y0) / 2.0
    if r <= 0:
        return None

    angles: list[float] = []
    for b in accepted:
        corners = [(b.x_min, b.y_min), (b.x_max, b.y_min), (b.x_max, b.y_max), (b.x_min, b.y_max)]
        for a, bb in zip(corners, corners[1:] + corners[:1]):
            for x, y in _segment_circle(a, bb, cx, cy, r):
                angles.append(math.degrees(math.atan2(y - cy, x - cx)) % 360.0)
    merged = _merge_close_angles(sorted(angles), 5.0)
    if len(merged) < 2:
        return PieGeometry(Point(cx, cy), r, (Sector(0.0, 360.0),))
    merged.sort()
    sectors = []
    for i, a in enumerate(merged):
        b = merged[(i + 1) % len(merged)]
        span = (b - a) % 360.0 or 360.0
        sectors.append(Sector(a, a + span))
    total = sum(s.span for s in sectors)
    sectors = [Sector(s.start_angle, s.start_angle + s.span * 360.0 / total) for s in sectors]
    return PieGeometry(Point(cx, cy), r, tuple(sectors))


def _segment_circle(a: tuple[float, float], b: tuple[float, float],
                    cx: float, cy: float, r: float) -> list[tuple[float, float]]:
    ax, ay = a[0] - cx, a[1] - cy
    vx, vy = b[0] - a[0], b[1] - a[1]
    A = vx * vx + vy * vy
    if A <= 1e-12:
        return []
    B = 2.0 * (ax * vx + ay * vy)
    C = ax * ax + ay * ay - r * r
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    pts = []
    for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        if 0.0 <= t <= 1.0:
            pts.append((a[0] + t * vx, a[1] + t * vy))
    return pts
