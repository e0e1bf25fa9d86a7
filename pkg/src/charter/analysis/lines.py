"""Line and scatter extraction.

Lines: the stroke heatmap gates the raster, surviving pixels are clustered
by color, clusters are split into connected components and stitched back
together across dashes/occlusions, and knee peaks pin the vertices.

Scatter: dot-heatmap peaks mapped through the recovered axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..categories import HM_LINE_KNEE, HM_LINE_STROKE, HM_SCATTER_DOT, HM_X_TICK, HM_Y_TICK
from ..geometry import BBox, Component, connected_components, local_maxima, morphology, refine_peak
from ..oracle import OcrOutput
from ..raster import Heatmap, Raster
from ..table import PROV_AXIS, PROV_LEGEND, PROV_POSITIONAL
from .axis import AxisModel
from .bars import match_legend
from .colors import box_mask, estimate_background
from .config import DEFAULT_ANALYSIS_CONFIG, AnalysisConfig
from .errors import EmptyTableError


@dataclass(frozen=True)
class SeriesExtract:
    label: str
    points: tuple[tuple[float, float], ...]  # (x_value, y_value), x ascending
    color: tuple[int, int, int]
    label_provenance: str


def _stroke_mask(raster: Raster, heatmaps: dict[str, Heatmap], ocr: OcrOutput,
                 config: AnalysisConfig) -> np.ndarray:
    """Raster pixels that are non-background, not text, not on an axis line,
    and supported by the stroke heatmap."""
    stroke_hm = heatmaps[HM_LINE_STROKE]
    scale = raster.height // stroke_hm.height
    gate = np.repeat(np.repeat(stroke_hm.values >= config.heatmap_threshold, scale, axis=0),
                     scale, axis=1)
    gate = gate[: raster.height, : raster.width]
    bg = estimate_background(raster)
    fg = np.linalg.norm(raster.array.astype(np.float64) - bg, axis=2) \
        > config.background_color_distance
    fg &= ~box_mask(fg.shape, [t.box for t in ocr.tokens], inflate=1.0)
    fg &= gate
    # ticks sit on their axis line: blank those rows/columns so the axis
    # stroke never masquerades as a flat series
    for cat, axis in ((HM_X_TICK, 0), (HM_Y_TICK, 1)):
        hm = heatmaps.get(cat)
        if hm is None:
            continue
        peaks = local_maxima(hm, config.heatmap_threshold, config.peak_min_distance)
        if len(peaks) < 2:
            continue
        coords = [(p.y if axis == 0 else p.x) * config.heatmap_scale for p in peaks]
        line = int(round(float(np.median(coords))))
        lo, hi = max(0, line - 3), line + 4
        if axis == 0:
            fg[lo:hi, :] = False
        else:
            fg[:, lo:hi] = False
    return fg


def _color_clusters(raster: Raster, mask: np.ndarray,
                    config: AnalysisConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """Greedy color clustering of masked pixels: (representative color,
    boolean pixel mask) per cluster, largest first."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return []
    pix = raster.array[ys, xs].astype(np.float64)
    # quantize to tame anti-aliasing, then merge quantized colors greedily
    quant = (pix // 16).astype(np.int64)
    keys = quant[:, 0] * 10000 + quant[:, 1] * 100 + quant[:, 2]
    uniq, inv, counts = np.unique(keys, return_inverse=True, return_counts=True)
    reps = np.zeros((len(uniq), 3))
    for i in range(len(uniq)):
        reps[i] = pix[inv == i].mean(axis=0)

    order = np.argsort(-counts)
    assigned = np.full(len(uniq), -1)
    centers: list[np.ndarray] = []
    for i in order:
        placed = False
        for ci, c in enumerate(centers):
            if np.linalg.norm(reps[i] - c) < config.line_color_merge_distance:
                assigned[i] = ci
                placed = True
                break
        if not placed:
            assigned[i] = len(centers)
            centers.append(reps[i].copy())

    clusters = []
    for ci, c in enumerate(centers):
        sel = assigned[inv] == ci
        if int(sel.sum()) < config.line_min_cluster_px:
            continue
        m = np.zeros_like(mask)
        m[ys[sel], xs[sel]] = True
        clusters.append((c, m))
    clusters.sort(key=lambda t: -int(t[1].sum()))
    return clusters


@dataclass(frozen=True)
class _CompGeom:
    comp: Component
    direction: tuple[float, float]  # unit, oriented toward +x (ties: +y)
    head: tuple[float, float]  # extreme pixel against the direction
    tail: tuple[float, float]  # extreme pixel along the direction


def _comp_geom(comp: Component) -> _CompGeom:
    xs = comp.xs.astype(np.float64)
    ys = comp.ys.astype(np.float64)
    mx, my = xs.mean(), ys.mean()
    cov = np.cov(np.stack([xs - mx, ys - my])) if len(xs) > 1 else np.eye(2)
    w, v = np.linalg.eigh(np.atleast_2d(cov))
    d = v[:, int(np.argmax(w))]
    if d[0] < 0 or (abs(d[0]) < 1e-9 and d[1] < 0):
        d = -d
    proj = (xs - mx) * d[0] + (ys - my) * d[1]
    i_lo, i_hi = int(np.argmin(proj)), int(np.argmax(proj))
    return _CompGeom(comp, (float(d[0]), float(d[1])),
                     (float(xs[i_lo]), float(ys[i_lo])),
                     (float(xs[i_hi]), float(ys[i_hi])))


def _stitch(comps: list[Component], config: AnalysisConfig) -> list[list[Component]]:
    """Chain fragments whose facing endpoints are close and whose join
    direction stays inside the stitch cone relative to the fragment's own
    direction (bridges dash gaps and crossings)."""
    geoms = sorted((_comp_geom(c) for c in comps), key=lambda g: g.comp.xs.min())
    cos_lim = math.cos(math.radians(config.line_stitch_slope_deg))
    chains: list[list[_CompGeom]] = []
    for g in geoms:
        best = None
        for chain in chains:
            prev = chain[-1]
            gx = g.head[0] - prev.tail[0]
            gy = g.head[1] - prev.tail[1]
            gap = math.hypot(gx, gy)
            if gap > config.line_stitch_gap_px:
                continue
            if gap > 2.0:
                # the jump must follow the outgoing fragment's direction
                cos_a = (gx * prev.direction[0] + gy * prev.direction[1]) / gap
                if cos_a < cos_lim:
                    continue
            if best is None or gap < best[0]:
                best = (gap, chain)
        if best is not None:
            best[1].append(g)
        else:
            chains.append([g])
    return [[g.comp for g in chain] for chain in chains]


def _knee_columns(knees: list[tuple[float, float]]) -> list[float]:
    """Distinct vertex x-positions across every knee peak, merged within
    3 px. Crossing series share vertex columns, so the blended peak of two
    merged knee splats still lands on the right column."""
    xs = sorted(k[0] for k in knees)
    cols: list[list[float]] = []
    for x in xs:
        if cols and x - cols[-1][-1] <= 3.0:
            cols[-1].append(x)
        else:
            cols.append([x])
    return [float(np.mean(c)) for c in cols]


def _span_fit(xs: np.ndarray, ys: np.ndarray, x0: float, x1: float, min_px: int = 10):
    """Total-least-squares centerline of the pixels strictly between two
    vertex columns; None when the span has too few pixels (dash gap or
    occlusion)."""
    sel = (xs > x0 + 3.0) & (xs < x1 - 3.0)
    if int(sel.sum()) < min_px or float(np.ptp(xs[sel])) < 4.0:
        return None
    px, py = xs[sel], ys[sel]
    mx, my = float(px.mean()), float(py.mean())
    cov = np.cov(np.stack([px - mx, py - my]))
    w, v = np.linalg.eigh(cov)
    d = v[:, int(np.argmax(w))]
    if abs(d[0]) < 1e-6:
        return None
    slope = float(d[1] / d[0])
    return slope, my - slope * mx


def _terminal_y(xs: np.ndarray, ys: np.ndarray, kx: float, slope: float,
                first: bool) -> float | None:
    """Vertex y at a chain end from the stroke's own extreme pixels. The
    span's slope sign says which way the line leaves the vertex, hence which
    extreme marks it."""
    near = np.abs(xs - kx) <= 3.0
    if not np.any(near):
        return None
    yy = ys[near]
    y_ext = float(yy.min() if (slope > 0) == first else yy.max())
    # a local fit over the last stretch of stroke is immune to the dash-phase
    # slope bias a whole-span fit picks up; the extreme pixel, overshot by the
    # stroke cap, brackets it from the other side
    sel = np.abs(xs - kx) <= 10.0
    if int(sel.sum()) >= 8 and float(np.ptp(xs[sel])) >= 3.0:
        px, py = xs[sel], ys[sel]
        mx, my = float(px.mean()), float(py.mean())
        cov = np.cov(np.stack([px - mx, py - my]))
        w, v = np.linalg.eigh(cov)
        d = v[:, int(np.argmax(w))]
        if abs(d[0]) > 1e-6:
            y_fit = my + (d[1] / d[0]) * (kx - mx)
            lo, hi = sorted((y_ext, y_fit))
            return min(max((y_ext + y_fit) / 2.0, lo), hi)
    return y_ext


def _chain_polyline(chain: list[Component], knees: list[tuple[float, float]],
                    config: AnalysisConfig) -> list[tuple[float, float]]:
    """Vertices of one stitched chain.

    Knee peaks supply only the vertex columns; each vertex's y comes from
    the chain's own pixels (total-least-squares fits of the spans on either
    side, met at the column). Knee y-positions are never used — where
    several series cross, their knee splats blend and the blended y belongs
    to no one."""
    xs = np.concatenate([c.xs for c in chain]).astype(np.float64)
    ys = np.concatenate([c.ys for c in chain]).astype(np.float64)

    # the polyline runs the cluster's whole x-extent: accept every column in
    # range, with slack at the ends so a dash gap cannot swallow a terminal
    slack = 1.5 * config.knee_snap_distance_px
    cols = [kx for kx in _knee_columns(knees)
            if xs.min() - slack <= kx <= xs.max() + slack]
    if len(cols) < 2:
        i_lo, i_hi = int(np.argmin(xs)), int(np.argmax(xs))
        return [(float(xs[i_lo]), float(ys[i_lo])), (float(xs[i_hi]), float(ys[i_hi]))]

    fits = [_span_fit(xs, ys, x0, x1) or _span_fit(xs, ys, x0, x1, min_px=4)
            for x0, x1 in zip(cols, cols[1:])]

    verts: list[tuple[float, float]] = []
    for i, kx in enumerate(cols):
        left = fits[i - 1] if i > 0 else None
        right = fits[i] if i < len(fits) else None
        sides = [f for f in (left, right) if f is not None]
        if i in (0, len(cols) - 1) and len(sides) == 1 and abs(sides[0][0]) > 3.0:
            # terminal vertex on a steep span: extrapolating the fit is
            # leverage-happy, but the stroke physically ends at the vertex
            y = _terminal_y(xs, ys, kx, sides[0][0], first=(i == 0))
            if y is not None:
                verts.append((kx, y))
                continue
        if (left is not None and right is not None
                and min(abs(left[0]), abs(right[0])) > 3.0
                and left[0] * right[0] < 0.0):
            # the vertex is where the side centerlines meet — well conditioned
            # exactly where evaluating a steep span at kx is not
            ix = (right[1] - left[1]) / (left[0] - right[0])
            if abs(ix - kx) <= 6.0:
                verts.append((kx, float(left[0] * ix + left[1])))
                continue
        # a steep span's y(x) is leverage-happy; trust a shallow neighbor alone
        shallow = [f for f in sides if abs(f[0]) <= 3.0]
        use = shallow if shallow else sides
        if use:
            y = float(np.mean([s * kx + b for s, b in use]))
        else:
            near = np.abs(xs - kx) <= 6.0
            if not np.any(near):
                continue
            y = float(ys[near].mean())
        verts.append((kx, y))
    # a knee peak on this column near the pixel estimate is the vertex
    # itself (or the blend of near-coincident crossing vertices): sharper
    # than anything recoverable from occluded stroke pixels
    snapped: list[tuple[float, float]] = []
    for kx, y in verts:
        cand = [ky for nx, ky in knees if abs(nx - kx) <= 3.0]
        if cand:
            ky = min(cand, key=lambda v: abs(v - y))
            # distinct knees a few px apart blur each other: snapping across
            # a larger gap is safe only when the column has a single knee
            unambiguous = all(abs(c - ky) <= 3.0 for c in cand)
            if abs(ky - y) <= (10.0 if unambiguous else 3.0):
                y = ky
        snapped.append((kx, y))
    return snapped


def extract_lines(
    raster: Raster,
    heatmaps: dict[str, Heatmap],
    axes: dict[str, AxisModel | None],
    ocr: OcrOutput,
    legend_box: BBox | None = None,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> list[SeriesExtract]:
    """One SeriesExtract per color cluster that stitches into a polyline."""
    x_axis, y_axis = axes.get("x"), axes.get("y")
    if x_axis is None or y_axis is None:
        raise EmptyTableError("line chart needs both numeric axes")
    if HM_LINE_STROKE not in heatmaps:
        raise EmptyTableError("no line stroke evidence")

    mask = _stroke_mask(raster, heatmaps, ocr, config)
    clusters = _color_clusters(raster, mask, config)
    if not clusters:
        raise EmptyTableError("no line pixels above the stroke threshold")

    knee_hm = heatmaps.get(HM_LINE_KNEE)
    knees: list[tuple[float, float]] = []
    if knee_hm is not None:
        scale = config.heatmap_scale
        # adjacent vertices of one polyline can sit closer than the generic
        # suppression radius; knees are deduplicated downstream by column
        for p in local_maxima(knee_hm, config.heatmap_threshold, 1):
            rp = refine_peak(knee_hm, p)
            knees.append((rp.x * scale, rp.y * scale))

    series: list[tuple[np.ndarray, list[tuple[float, float]]]] = []
    for color, cmask in clusters:
        comps = connected_components(morphology(cmask, "close", 1))
        comps = [c for c in comps if c.area >= 4]
        if not comps:
            continue
        chains = _stitch(comps, config)
        chains.sort(key=lambda ch: -sum(c.area for c in ch))
        # one color = one series: chains are fragments of the same line (an
        # over-long dash gap splits a chain). Pool fragments that extend the
        # covered x-range; junk (crossing blends, stray pixels) sits inside it.
        covered = np.zeros(raster.width + 1, dtype=bool)
        pooled: list[Component] = []
        for ch in chains:
            if pooled and sum(c.area for c in ch) < 8:
                continue
            c_lo = int(min(c.xs.min() for c in ch))
            c_hi = int(max(c.xs.max() for c in ch))
            if pooled and int(covered[c_lo:c_hi + 1].sum()) > 4:
                continue
            pooled.extend(ch)
            covered[c_lo:c_hi + 1] = True
        poly = _chain_polyline(pooled, knees, config)
        if len(poly) < 2:
            continue
        series.append((color, poly))
    if not series:
        raise EmptyTableError("no stitchable line found")

    labels = _series_labels([c for c, _ in series], raster, ocr, legend_box, config)
    out: list[SeriesExtract] = []
    for (color, poly), (lab, lprov) in zip(series, labels):
        points = tuple((x_axis.value_at(px), y_axis.value_at(py)) for px, py in poly)
        out.append(SeriesExtract(lab, points, tuple(int(round(c)) for c in color), lprov))
    out.sort(key=lambda s: s.label)
    return out


def _series_labels(colors: list[np.ndarray], raster: Raster, ocr: OcrOutput,
                   legend_box: BBox | None,
                   config: AnalysisConfig) -> list[tuple[str, str]]:
    if legend_box is not None:
        assign = match_legend(legend_box, ocr, colors, raster, config)
        return [(assign.get(i, f"series_{i}"),
                 PROV_LEGEND if i in assign else PROV_POSITIONAL)
                for i in range(len(colors))]
    return [(f"series_{i}", PROV_POSITIONAL) for i in range(len(colors))]


def extract_scatter(
    heatmaps: dict[str, Heatmap],
    axes: dict[str, AxisModel | None],
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> list[tuple[float, float]]:
    """Decoded (x, y) values of every scatter dot peak, sorted by x then y."""
    x_axis, y_axis = axes.get("x"), axes.get("y")
    if x_axis is None or y_axis is None:
        raise EmptyTableError("scatter chart needs both numeric axes")
    dot_hm = heatmaps.get(HM_SCATTER_DOT)
    if dot_hm is None:
        raise EmptyTableError("no scatter dot evidence")
    scale = config.heatmap_scale
    pts = []
    for p in local_maxima(dot_hm, config.heatmap_threshold, config.peak_min_distance):
        rp = refine_peak(dot_hm, p)
        pts.append((x_axis.value_at(rp.x * scale), y_axis.value_at(rp.y * scale)))
    pts.sort()
    return pts
