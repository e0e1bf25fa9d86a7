"""Numeric axis recovery from OCR tokens.

The collinearity search is a 1-D Hough: tokens are binned by the
coordinate orthogonal to the axis, and the best-populated monotone bin is
fit with least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import local_maxima, refine_peak
from ..oracle import OcrOutput, OcrToken, parse_numeric_token
from ..raster import Heatmap
from .config import DEFAULT_ANALYSIS_CONFIG, AnalysisConfig


@dataclass(frozen=True)
class AxisModel:
    orientation: str  # "x" | "y"
    slope: float  # value units per pixel
    intercept: float
    support: tuple[tuple[float, float], ...]  # (pixel, value) pairs used in the fit
    title: str | None = None

    def __post_init__(self):
        if self.slope == 0.0:
            raise ValueError("axis slope must be nonzero")
        if len(self.support) < 2:
            raise ValueError("axis needs at least 2 support points")

    def value_at(self, pixel: float) -> float:
        return self.slope * pixel + self.intercept

    def pixel_at(self, value: float) -> float:
        return (value - self.intercept) / self.slope


def _numeric_tokens(ocr: OcrOutput) -> list[tuple[OcrToken, float]]:
    """(token, value) pairs, with exponent digit tokens consumed so they do
    not reappear as stray small integers."""
    consumed: set[int] = set()
    values: list[tuple[OcrToken, float]] = []
    from ..oracle import _superscript_partner  # shared geometry test

    for tok in ocr.tokens:
        if tok.text.strip() == "10":
            partner = _superscript_partner(tok, ocr.tokens)
            if partner is not None:
                consumed.add(id(partner))
    for tok in ocr.tokens:
        if id(tok) in consumed:
            continue
        v = parse_numeric_token(tok, ocr.tokens)
        if v is not None:
            values.append((tok, v))
    return values


def _along_coord(tok: OcrToken, orientation: str) -> float:
    b = tok.box
    if orientation == "y":
        return (b.y_min + b.y_max) / 2.0
    # Rotated x labels are anchored by their upper-right corner at the tick.
    if abs(tok.angle) > 5.0:
        return b.x_max
    return (b.x_min + b.x_max) / 2.0


def _ortho_coord(tok: OcrToken, orientation: str) -> float:
    b = tok.box
    if orientation == "y":
        return (b.x_min + b.x_max) / 2.0
    return (b.y_min + b.y_max) / 2.0


def _longest_monotone(pixels: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Indices of the longest strictly monotone subsequence of values,
    taken in pixel order (O(n^2), n is tiny)."""
    n = len(values)
    order = np.argsort(pixels, kind="stable")
    v = values[order]
    best: list[int] = []
    for sign in (1.0, -1.0):
        dp = [1] * n
        prev = [-1] * n
        for i in range(n):
            for j in range(i):
                if sign * (v[i] - v[j]) > 0 and dp[j] + 1 > dp[i]:
                    dp[i] = dp[j] + 1
                    prev[i] = j
        k = int(np.argmax(dp))
        seq = []
        while k >= 0:
            seq.append(k)
            k = prev[k]
        seq.reverse()
        if len(seq) > len(best):
            best = seq
    return order[np.array(best, dtype=int)]


def recover_axis(
    ocr: OcrOutput,
    orientation: str,
    tick_heatmap: Heatmap | None = None,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
    title: str | None = None,
) -> AxisModel | None:
    """Affine pixel->value mapping from collinear numeric tick labels, or
    None when no usable axis is present."""
    if orientation not in ("x", "y"):
        raise ValueError("orientation must be 'x' or 'y'")
    numeric = _numeric_tokens(ocr)
    if len(numeric) < 2:
        return None

    heights = np.array([t.height for t, _ in numeric])
    bin_width = config.axis_bin_height_factor * float(np.median(heights))
    ortho = np.array([_ortho_coord(t, orientation) for t, _ in numeric])
    along = np.array([_along_coord(t, orientation) for t, _ in numeric])
    vals = np.array([v for _, v in numeric])

    # group tokens whose orthogonal coordinates are within one bin of each other
    order = np.argsort(ortho, kind="stable")
    groups: list[list[int]] = []
    for idx in order:
        if groups and abs(ortho[idx] - ortho[groups[-1][-1]]) <= bin_width:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    groups.sort(key=lambda g: (-len(g), ortho[g[0]]))

    snap_pixels = None
    if tick_heatmap is not None:
        peaks = [refine_peak(tick_heatmap, p) for p in
                 local_maxima(tick_heatmap, config.heatmap_threshold, config.peak_min_distance)]
        coords = [(p.x if orientation == "x" else p.y) * config.heatmap_scale for p in peaks]
        snap_pixels = np.array(sorted(coords)) if coords else None

    for g in groups:
        if len(g) < 2:
            break
        gi = np.array(g, dtype=int)
        keep = gi[_longest_monotone(along[gi], vals[gi])]
        if len(keep) < 2:
            continue
        pixels = along[keep].astype(np.float64)
        values = vals[keep].astype(np.float64)
        if snap_pixels is not None and snap_pixels.size:
            for i, p in enumerate(pixels):
                j = int(np.argmin(np.abs(snap_pixels - p)))
                if abs(snap_pixels[j] - p) <= config.tick_snap_distance_px:
                    pixels[i] = snap_pixels[j]
        model = _fit(pixels, values, orientation, config, title)
        if model is not None:
            return model
    return None


def _fit(pixels: np.ndarray, values: np.ndarray, orientation: str,
         config: AnalysisConfig, title: str | None) -> AxisModel | None:
    """Consensus fit: the line through the token pair that explains the most
    tokens within tolerance wins, so stray numeric text (however extreme)
    has no say. Deterministic — ties break toward lower residual."""
    n = len(pixels)
    if n < 2 or np.ptp(pixels) < 1e-9:
        return None
    tol = config.axis_residual_tolerance_px
    best: tuple[int, float, np.ndarray] | None = None
    for i in range(n):
        for j in range(i + 1, n):
            dp = pixels[j] - pixels[i]
            if abs(dp) < 1e-9:
                continue
            slope = (values[j] - values[i]) / dp
            if slope == 0.0:
                continue
            intercept = values[i] - slope * pixels[i]
            resid_px = np.abs((slope * pixels + intercept) - values) / abs(slope)
            inliers = resid_px <= tol
            k = int(inliers.sum())
            if k < 2:
                continue
            rms = float(np.sqrt(np.mean(resid_px[inliers] ** 2)))
            if best is None or (-k, rms) < best[:2]:
                best = (-k, rms, inliers)
    if best is None:
        return None
    px, vv = pixels[best[2]], values[best[2]]
    while len(px) >= 2 and np.ptp(px) > 1e-9:
        slope, intercept = np.polyfit(px, vv, 1)
        if slope == 0.0:
            return None
        resid_px = np.abs((slope * px + intercept) - vv) / abs(slope)
        if float(resid_px.max()) <= tol:
            if np.ptp(px) < config.axis_min_span_px:
                return None  # tick rows span a plot edge; this is stray text
            support = tuple(sorted(zip(px.tolist(), vv.tolist())))
            return AxisModel(orientation, float(slope), float(intercept), support, title)
        worst = int(np.argmax(resid_px))
        px = np.delete(px, worst)
        vv = np.delete(vv, worst)
    return None
