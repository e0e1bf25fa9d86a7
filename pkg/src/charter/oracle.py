"""Detector / OCR oracle: turns ground truth into the box, heatmap, and
text-token inputs the analysis stage consumes, with a configurable
corruption model so extraction can be stress-tested without trained
networks."""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import ndimage

from .categories import BOX_CAPTION, BOX_TITLE, BOX_X_LABEL, BOX_Y_LABEL
from .geometry import BBox, Point
from .raster import Heatmap
from .synth.gt import (
    GroundTruth,
    ROLE_CAPTION,
    ROLE_TITLE,
    ROLE_X_TITLE,
    ROLE_Y_TITLE,
)
from .synth.heatmaps import emit_heatmaps


@dataclass(frozen=True)
class NoiseConfig:
    box_jitter_sigma: float = 0.0  # px, per corner coordinate
    score_sigma: float = 0.0
    false_positive_rate: float = 0.0  # per element category
    false_negative_rate: float = 0.0  # element boxes only
    heatmap_blur_sigma: float = 0.0  # heatmap px
    heatmap_speckle_amplitude: float = 0.0
    ocr_char_substitution_rate: float = 0.0
    ocr_token_drop_rate: float = 0.0

    def __post_init__(self):
        for f in ("false_positive_rate", "false_negative_rate",
                  "ocr_char_substitution_rate", "ocr_token_drop_rate"):
            v = getattr(self, f)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{f} must be in [0, 1], got {v}")
        for f in ("box_jitter_sigma", "score_sigma", "heatmap_blur_sigma",
                  "heatmap_speckle_amplitude"):
            if getattr(self, f) < 0.0:
                raise ValueError(f"{f} must be >= 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseConfig":
        return cls(**d)

    @classmethod
    def load_json(cls, path: str | Path) -> "NoiseConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def preset(cls, name: str) -> "NoiseConfig":
        try:
            text = resources.files("charter.presets").joinpath(f"{name}.json").read_text()
        except FileNotFoundError:
            raise ValueError(f"unknown noise preset {name!r}") from None
        return cls.from_dict(json.loads(text))


PRESET_NAMES = ("clean", "mild", "harsh")


@dataclass(frozen=True)
class DetectorOutput:
    boxes: tuple[BBox, ...]
    heatmaps: dict[str, Heatmap]


@dataclass(frozen=True)
class OcrToken:
    polygon: tuple[tuple[float, float], ...]  # 4 corners, clockwise from top-left
    angle: float  # degrees in (-90, 90]
    text: str
    is_superscript_candidate: bool = False

    @property
    def box(self) -> BBox:
        xs = [p[0] for p in self.polygon]
        ys = [p[1] for p in self.polygon]
        return BBox(min(xs), min(ys), max(xs), max(ys))

    @property
    def height(self) -> float:
        b = self.box
        return b.height


@dataclass(frozen=True)
class OcrOutput:
    tokens: tuple[OcrToken, ...]


_STAGE1_TEXT_ROLES = {
    ROLE_TITLE: BOX_TITLE,
    ROLE_CAPTION: BOX_CAPTION,
    ROLE_X_TITLE: BOX_X_LABEL,
    ROLE_Y_TITLE: BOX_Y_LABEL,
}


def _sector_bbox(center: tuple[float, float], radius: float, start: float, end: float) -> BBox:
    """Axis-aligned bounds of a pie wedge (center plus its arc)."""
    cx, cy = center
    pts = [(cx, cy)]
    for ang in (start, end):
        rad = math.radians(ang)
        pts.append((cx + radius * math.cos(rad), cy + radius * math.sin(rad)))
    for card in range(-360, 721, 90):
        if start < card < end:
            rad = math.radians(card)
            pts.append((cx + radius * math.cos(rad), cy + radius * math.sin(rad)))
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return BBox(min(xs), min(ys), max(xs) + 1e-6, max(ys) + 1e-6, category="pie_sector")


def _gt_boxes(gt: GroundTruth) -> tuple[list[BBox], list[BBox]]:
    """(page-level boxes, element boxes) straight from ground truth."""
    page: list[BBox] = [gt.chart_region]
    if gt.legend is not None:
        page.append(dataclasses.replace(gt.legend.box, category="legend"))
    for t in gt.text_boxes:
        cat = _STAGE1_TEXT_ROLES.get(t.role)
        if cat is not None:
            b = t.box
            page.append(BBox(b.x_min - 2, b.y_min - 2, b.x_max + 2, b.y_max + 2, category=cat))
    elements: list[BBox] = [b.box for b in gt.bars]
    for pie in gt.pies:
        for s in pie.sectors:
            elements.append(_sector_bbox(pie.center, pie.radius, s.start_angle, s.end_angle))
    return page, elements


def _jitter_box(b: BBox, rng: np.random.Generator, sigma: float, score_sigma: float,
                canvas: int) -> BBox:
    if sigma > 0:
        d = rng.normal(0.0, sigma, size=4)
    else:
        d = np.zeros(4)
    x0, y0, x1, y1 = b.x_min + d[0], b.y_min + d[1], b.x_max + d[2], b.y_max + d[3]
    x0, x1 = min(x0, x1 - 1e-3), max(x1, x0 + 1e-3)
    y0, y1 = min(y0, y1 - 1e-3), max(y1, y0 + 1e-3)
    score = 1.0
    if score_sigma > 0:
        score = float(np.clip(1.0 - abs(rng.normal(0.0, score_sigma)), 0.0, 1.0))
    return BBox(x0, y0, x1, y1, category=b.category, score=score)


def simulate_detector(gt: GroundTruth, noise: NoiseConfig, seed: int,
                      resolution: int = 128) -> DetectorOutput:
    """Stage-1/2 stand-in: GT boxes jittered and score-perturbed, GT heatmaps
    blurred with added speckle, plus uniform false positives. Deterministic
    per (gt, noise, seed)."""
    rng = np.random.default_rng([seed, 0xDE7EC7])
    page, elements = _gt_boxes(gt)
    out: list[BBox] = []
    for b in page:
        out.append(_jitter_box(b, rng, noise.box_jitter_sigma, noise.score_sigma, gt.canvas_size))
    kept_elements = []
    for b in elements:
        if noise.false_negative_rate > 0 and rng.random() < noise.false_negative_rate:
            continue
        kept_elements.append(_jitter_box(b, rng, noise.box_jitter_sigma, noise.score_sigma,
                                         gt.canvas_size))
    out.extend(kept_elements)

    # false positives, uniform within the chart region
    if noise.false_positive_rate > 0 and elements:
        by_cat: dict[str, list[BBox]] = {}
        for b in elements:
            by_cat.setdefault(b.category, []).append(b)
        reg = gt.chart_region
        for cat, boxes in sorted(by_cat.items()):
            n_fp = int(rng.binomial(len(boxes), noise.false_positive_rate))
            med_w = float(np.median([b.width for b in boxes]))
            med_h = float(np.median([b.height for b in boxes]))
            for _ in range(n_fp):
                w = med_w * rng.uniform(0.4, 2.2)
                h = med_h * rng.uniform(0.4, 2.2)
                x0 = rng.uniform(reg.x_min, max(reg.x_min + 1.0, reg.x_max - w))
                y0 = rng.uniform(reg.y_min, max(reg.y_min + 1.0, reg.y_max - h))
                out.append(BBox(x0, y0, x0 + w, y0 + h, category=cat,
                                score=float(rng.uniform(0.1, 0.9))))

    heatmaps = emit_heatmaps(gt, resolution=resolution)
    if noise.heatmap_blur_sigma > 0 or noise.heatmap_speckle_amplitude > 0:
        degraded = {}
        for cat, hm in heatmaps.items():
            vals = hm.values.astype(np.float64)
            if noise.heatmap_blur_sigma > 0:
                vals = ndimage.gaussian_filter(vals, noise.heatmap_blur_sigma)
            if noise.heatmap_speckle_amplitude > 0:
                speckle = (rng.random(vals.shape) < 0.02)
                vals = vals + noise.heatmap_speckle_amplitude * speckle
            degraded[cat] = Heatmap(np.clip(vals, 0.0, 1.0), cat)
        heatmaps = degraded
    return DetectorOutput(boxes=tuple(out), heatmaps=heatmaps)


_ALNUM = "abcdefghijklmnopqrstuvwxyz0123456789"


def simulate_ocr(gt: GroundTruth, noise: NoiseConfig, seed: int) -> OcrOutput:
    """Stage-3 stand-in: one token per GT text box, with configurable
    character substitutions and token drops. Rotated text comes back
    de-rotated with its angle recorded."""
    rng = np.random.default_rng([seed, 0x0C12])
    tokens: list[OcrToken] = []
    heights = [t.box.height for t in gt.text_boxes if t.angle == 0.0]
    median_h = float(np.median(heights)) if heights else 12.0
    for t in gt.text_boxes:
        if noise.ocr_token_drop_rate > 0 and rng.random() < noise.ocr_token_drop_rate:
            continue
        text = t.text
        if noise.ocr_char_substitution_rate > 0:
            chars = list(text)
            for i, ch in enumerate(chars):
                if ch.isalnum() and rng.random() < noise.ocr_char_substitution_rate:
                    repl = ch
                    while repl == ch:
                        repl = _ALNUM[int(rng.integers(len(_ALNUM)))]
                    chars[i] = repl
            text = "".join(chars)
        b = t.box
        poly = ((b.x_min, b.y_min), (b.x_max, b.y_min), (b.x_max, b.y_max), (b.x_min, b.y_max))
        tokens.append(OcrToken(
            polygon=poly,
            angle=t.angle if -90.0 < t.angle <= 90.0 else ((t.angle + 90.0) % 180.0) - 90.0,
            text=text,
            is_superscript_candidate=bool(t.angle == 0.0 and b.height < 0.75 * median_h),
        ))
    return OcrOutput(tokens=tuple(tokens))


_NUMBER_RE = re.compile(r"^[+-]?(\d{1,3}(,\d{3})+|\d+)(\.\d+)?([eE][+-]?\d+)?$")
_CURRENCY = "$€£¥"


def numeric_text_value(text: str) -> float | None:
    """Parse a plain decimal, stripping currency symbols, thousands
    separators, and a trailing percent sign. None means not a number."""
    s = text.strip()
    while s and s[0] in _CURRENCY:
        s = s[1:]
    if s.endswith("%"):
        s = s[:-1]
    s = s.strip()
    if not s or not _NUMBER_RE.match(s):
        return None
    try:
        return float(s.replace(",", ""))
    except ValueError:
        return None


def _superscript_partner(token: OcrToken, tokens) -> OcrToken | None:
    """The raised, smaller, digit-only token immediately right of a '10'
    mantissa, if any. Baseline-aligned neighbors never qualify."""
    mb = token.box
    mid_y = (mb.y_min + mb.y_max) / 2.0
    best = None
    for t in tokens:
        if t is token or not t.text.isdigit():
            continue
        tb = t.box
        gap = tb.x_min - mb.x_max
        if gap < -1.0 or gap > 0.9 * mb.height:
            continue
        if tb.y_min >= mid_y:  # must sit above the mantissa midline
            continue
        if tb.height > 0.8 * mb.height:  # must be smaller than the mantissa
            continue
        if abs(tb.y_max - mb.y_max) < 0.25 * mb.height:  # shares the baseline
            continue
        if best is None or tb.x_min < best.box.x_min:
            best = t
    return best


def parse_numeric_token(token: OcrToken, tokens=()) -> float | None:
    """Numeric value of an OCR token, handling exponent notation: a '10'
    mantissa followed by a raised smaller digit token reads as a power of
    ten. Returns None for non-numeric text (a label, not a value)."""
    s = token.text.strip()
    if s == "10":
        partner = _superscript_partner(token, tokens)
        if partner is not None:
            return 10.0 ** int(partner.text)
    return numeric_text_value(s)
