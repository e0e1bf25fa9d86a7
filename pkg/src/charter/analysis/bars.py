"""Bar chart extraction: bar box filtering, value interpolation, and label
assignment (below-bar text, value-on-bar text, or legend color matching)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..categories import (
    BOX_CAPTION,
    BOX_HBAR,
    BOX_LEGEND,
    BOX_TITLE,
    BOX_VBAR,
    BOX_X_LABEL,
    BOX_Y_LABEL,
)
from ..geometry import BBox, connected_components
from ..oracle import OcrOutput, OcrToken, parse_numeric_token
from ..raster import Raster
from ..table import PROV_AXIS, PROV_LEGEND, PROV_POSITIONAL, PROV_VALUE_ON_BAR
from .axis import AxisModel
from .colors import box_mask, estimate_background, region_median_color
from .config import DEFAULT_ANALYSIS_CONFIG, AnalysisConfig
from .errors import EmptyTableError


@dataclass(frozen=True)
class BarExtract:
    label: str
    value: float
    box: BBox
    color: tuple[int, int, int]
    value_provenance: str
    label_provenance: str


def _modal_edge(edges: np.ndarray, tol: float) -> float:
    """Edge level supported by the most boxes (within tol), refined as the
    median of its supporters."""
    best_level, best_count = float(edges[0]), 0
    for e in edges:
        support = edges[np.abs(edges - e) <= tol]
        if len(support) > best_count:
            best_count = len(support)
            best_level = float(np.median(support))
    return best_level


def extract_bars(
    det_boxes,
    axes: dict[str, AxisModel | None],
    ocr: OcrOutput,
    raster: Raster,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> list[BarExtract]:
    """Recover (label, value) per bar. Raises EmptyTableError when no bar
    survives the width/baseline filters."""
    vertical = [b for b in det_boxes if b.category == BOX_VBAR and b.score >= config.box_score_threshold]
    horizontal = [b for b in det_boxes if b.category == BOX_HBAR and b.score >= config.box_score_threshold]
    is_vertical = len(vertical) >= len(horizontal)
    cands = vertical if is_vertical else horizontal
    if not cands:
        raise EmptyTableError("no bar proposals above the score threshold")

    widths = np.array([b.width if is_vertical else b.height for b in cands])
    med_w = float(np.median(widths))
    keep = [b for b, w in zip(cands, widths)
            if abs(w - med_w) <= config.bar_width_tolerance * med_w]
    if not keep:
        raise EmptyTableError("width filter removed every bar proposal")

    # Baseline: the horizontal (resp. vertical) edge most bars share.
    if is_vertical:
        lo_edges = np.array([b.y_max for b in keep])  # usual baseline (bottom)
        hi_edges = np.array([b.y_min for b in keep])
    else:
        lo_edges = np.array([b.x_min for b in keep])
        hi_edges = np.array([b.x_max for b in keep])
    tol = config.baseline_tolerance_px
    lo_mode = _modal_edge(lo_edges, tol)
    hi_mode = _modal_edge(hi_edges, tol)
    lo_support = int(np.sum(np.abs(lo_edges - lo_mode) <= tol))
    hi_support = int(np.sum(np.abs(hi_edges - hi_mode) <= tol))
    base_on_lo = lo_support >= hi_support
    baseline = lo_mode if base_on_lo else hi_mode
    edges = lo_edges if base_on_lo else hi_edges
    bars = [b for b, e in zip(keep, edges) if abs(e - baseline) <= tol]
    if not bars:
        raise EmptyTableError("no bars share a common baseline")
    bars.sort(key=lambda b: b.x_min if is_vertical else b.y_min)

    value_axis = axes.get("y" if is_vertical else "x")
    background = estimate_background(raster)

    out: list[BarExtract] = []
    legend_colors: list[np.ndarray] = []
    for b in bars:
        if is_vertical:
            free_edge = b.y_min if base_on_lo else b.y_max
        else:
            free_edge = b.x_max if base_on_lo else b.x_min
        if value_axis is not None:
            value = value_axis.value_at(free_edge)
            prov = PROV_AXIS
        else:
            tok = _value_token(b, ocr, is_vertical, base_on_lo, config)
            if tok is None:
                continue  # no way to read this bar's value
            value = tok
            prov = PROV_VALUE_ON_BAR
        color = region_median_color(raster, b)
        if color is None:
            color = background
        out.append(BarExtract("", float(value), b, tuple(int(c) for c in color), prov, PROV_POSITIONAL))
        legend_colors.append(color)
    if not out:
        raise EmptyTableError("bars present but no value source (axis or value labels)")

    # tokens already spoken for (titles, caption, legend) are not bar labels
    reserved = [b for b in det_boxes
                if b.category in (BOX_TITLE, BOX_CAPTION, BOX_X_LABEL, BOX_Y_LABEL, BOX_LEGEND)]
    labels = _positional_labels([b.box for b in out], ocr, is_vertical, baseline, config,
                                reserved)
    legend_box = _best_box(det_boxes, BOX_LEGEND)
    legend_assign: dict[int, str] = {}
    if legend_box is not None:
        legend_assign = match_legend(legend_box, ocr, legend_colors, raster, config)

    final: list[BarExtract] = []
    for i, bar in enumerate(out):
        if labels[i] is not None:
            lab, lprov = labels[i], PROV_POSITIONAL
        elif i in legend_assign:
            lab, lprov = legend_assign[i], PROV_LEGEND
        else:
            lab, lprov = f"bar_{i}", PROV_POSITIONAL
        final.append(BarExtract(lab, bar.value, bar.box, bar.color, bar.value_provenance, lprov))
    return final


def _best_box(boxes, category: str) -> BBox | None:
    cands = [b for b in boxes if b.category == category]
    return max(cands, key=lambda b: b.score) if cands else None


def _value_token(bar: BBox, ocr: OcrOutput, is_vertical: bool, base_on_lo: bool,
                 config: AnalysisConfig) -> float | None:
    """Numeric text written inside the bar or just beyond its free edge."""
    best = None
    best_d = config.value_on_bar_search_px
    for tok in ocr.tokens:
        v = parse_numeric_token(tok, ocr.tokens)
        if v is None:
            continue
        c = tok.box.center
        if is_vertical:
            if not (bar.x_min - 2 <= c.x <= bar.x_max + 2):
                continue
            edge = bar.y_min if base_on_lo else bar.y_max
            inside = bar.contains(c.x, c.y)
            d = 0.0 if inside else abs(c.y - edge)
        else:
            if not (bar.y_min - 2 <= c.y <= bar.y_max + 2):
                continue
            edge = bar.x_max if base_on_lo else bar.x_min
            inside = bar.contains(c.x, c.y)
            d = 0.0 if inside else abs(c.x - edge)
        if d <= best_d:
            best_d = d
            best = v
    return best


def _label_anchor(tok: OcrToken, is_vertical: bool) -> float:
    b = tok.box
    if is_vertical:
        return b.x_max - 3.0 if abs(tok.angle) > 5.0 else (b.x_min + b.x_max) / 2.0
    return (b.y_min + b.y_max) / 2.0


def _overlap_fraction(tok: BBox, region: BBox) -> float:
    ix = min(tok.x_max, region.x_max) - max(tok.x_min, region.x_min)
    iy = min(tok.y_max, region.y_max) - max(tok.y_min, region.y_min)
    if ix <= 0 or iy <= 0 or tok.area <= 0:
        return 0.0
    return (ix * iy) / tok.area


def _positional_labels(bars: list[BBox], ocr: OcrOutput, is_vertical: bool,
                       baseline: float, config: AnalysisConfig,
                       reserved: list[BBox] = ()) -> list[str | None]:
    """Non-numeric tokens below (vbar) / beside (hbar) each bar, matched to
    the nearest bar along the category axis."""
    cands: list[tuple[float, OcrToken]] = []
    for tok in ocr.tokens:
        if parse_numeric_token(tok, ocr.tokens) is not None:
            continue
        b = tok.box
        # a token belongs to a reserved region only if it sits mostly inside
        # it; rotated category labels can dip a corner into the axis-title box
        if any(_overlap_fraction(b, r) >= 0.7 for r in reserved):
            continue
        if is_vertical:
            if not (baseline - 2 <= b.y_min <= baseline + config.bar_label_search_px):
                continue
        else:
            if b.x_max > baseline + 2:
                continue
            if b.x_max < baseline - config.bar_label_search_px * 2.5:
                continue
        cands.append((_label_anchor(tok, is_vertical), tok))

    slots = [((b.x_min + b.x_max) / 2.0 if is_vertical else (b.y_min + b.y_max) / 2.0, i)
             for i, b in enumerate(bars)]
    half_slot = (np.median([b.width if is_vertical else b.height for b in bars]) * 0.9
                 if bars else 20.0)
    labels: list[str | None] = [None] * len(bars)
    used: set[int] = set()
    # nearest-first greedy assignment
    pairs = sorted(
        (abs(a - s), ti, si)
        for ti, (a, _) in enumerate(cands)
        for s, si in slots
    )
    for d, ti, si in pairs:
        if d > half_slot or ti in used or labels[si] is not None:
            continue
        labels[si] = cands[ti][1].text
        used.add(ti)
    return labels


def match_legend(
    legend_box: BBox,
    ocr: OcrOutput,
    element_colors: list[np.ndarray],
    raster: Raster,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> dict[int, str]:
    """Map element indices to legend labels by swatch color matching.
    Elements with no swatch within the color-distance bound stay unmapped."""
    x0 = int(max(0, np.floor(legend_box.x_min)))
    y0 = int(max(0, np.floor(legend_box.y_min)))
    x1 = int(min(raster.width, np.ceil(legend_box.x_max)))
    y1 = int(min(raster.height, np.ceil(legend_box.y_max)))
    if x1 - x0 < 4 or y1 - y0 < 4:
        return {}
    crop = raster.array[y0:y1, x0:x1].astype(np.float64)

    # panel background = most common color in the crop
    flat = crop.reshape(-1, 3)
    colors, counts = np.unique(flat.astype(np.uint8), axis=0, return_counts=True)
    panel = colors[int(np.argmax(counts))].astype(np.float64)

    fg = np.linalg.norm(crop - panel, axis=2) > config.background_color_distance
    tokens_in = [t for t in ocr.tokens
                 if legend_box.contains(*_center(t))]
    fg &= ~box_mask(fg.shape, [_shift_box(t.box, -x0, -y0) for t in tokens_in], inflate=1.0)

    swatches: list[tuple[np.ndarray, float, float]] = []  # color, cx, cy (full-image coords)
    for comp in connected_components(fg):
        if not (config.legend_swatch_min_area <= comp.area <= config.legend_swatch_max_area):
            continue
        pix = crop[comp.ys, comp.xs]
        if float(pix.std(axis=0).max()) > 25.0:
            continue
        cx = float(comp.xs.mean()) + x0
        cy = float(comp.ys.mean()) + y0
        swatches.append((np.median(pix, axis=0), cx, cy))

    entries: list[tuple[np.ndarray, str]] = []
    for color, cx, cy in swatches:
        best, best_dx = None, 1e9
        for t in tokens_in:
            tc = _center(t)
            dx = t.box.x_min - cx
            if dx > 0 and abs(tc[1] - cy) < t.box.height and dx < best_dx:
                best, best_dx = t, dx
        if best is not None:
            entries.append((color, best.text))

    out: dict[int, str] = {}
    for i, ec in enumerate(element_colors):
        best_lab, best_d = None, config.legend_color_max_distance
        for color, lab in entries:
            d = float(np.linalg.norm(np.asarray(ec, dtype=np.float64) - color))
            if d < best_d:
                best_d, best_lab = d, lab
        if best_lab is not None:
            out[i] = best_lab
    return out


def _center(tok: OcrToken) -> tuple[float, float]:
    c = tok.box.center
    return c.x, c.y


def _shift_box(b: BBox, dx: float, dy: float) -> BBox:
    return BBox(b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy, b.category, b.score)
