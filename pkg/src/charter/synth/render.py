"""Deterministic rasterization of a ChartSpec into a 512x512 chart image
plus exact sub-pixel ground truth."""

from __future__ import annotations

import hashlib
import math

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from ..geometry import BBox
from ..raster import Color, Raster
from ..categories import REGION_FOR_TYPE
from ..table import ChartTable, Row, Series
from .gt import (
    AxisGT,
    BarGT,
    GroundTruth,
    LegendEntryGT,
    LegendGT,
    LineGT,
    PieGT,
    SectorGT,
    TextBox,
    TickGT,
    ROLE_BAR_LABEL,
    ROLE_CAPTION,
    ROLE_DECOY,
    ROLE_EXP_DIGIT,
    ROLE_EXP_MANTISSA,
    ROLE_LEGEND_TEXT,
    ROLE_SECTOR_LABEL,
    ROLE_TICK_X,
    ROLE_TICK_Y,
    ROLE_TITLE,
    ROLE_VALUE_LABEL,
    ROLE_X_TITLE,
    ROLE_Y_TITLE,
)
from .spec import ChartSpec

INK = (20, 20, 20)
SIZE_TITLE = 18
SIZE_LABEL = 13
SIZE_TICK = 12
SIZE_EXP = 9
SIZE_CAPTION = 12


class LayoutOverflow(Exception):
    """Raised when a spec cannot be laid out on the canvas; callers resample."""


_FONTS: dict[int, ImageFont.FreeTypeFont] = {}


def _font(size: int):
    if size not in _FONTS:
        _FONTS[size] = ImageFont.load_default(size)
    return _FONTS[size]


def _text_size(text: str, size: int) -> tuple[float, float]:
    l, t, r, b = _font(size).getbbox(text)
    return float(r - l), float(b - t)


class _Canvas:
    """PIL canvas that records the exact bounds of everything it draws."""

    def __init__(self, spec: ChartSpec, size: int):
        self.spec = spec
        self.size = size
        self.im = Image.new("RGB", (size, size), spec.style.background.as_tuple())
        self.draw = ImageDraw.Draw(self.im)
        self.texts: list[TextBox] = []

    def text(
        self,
        s: str,
        x: float,
        y: float,
        *,
        size: int = SIZE_LABEL,
        anchor: str = "mm",
        angle: float = 0.0,
        role: str = "",
        group: int = -1,
        color=INK,
    ) -> TextBox:
        """Draw `s` and record its box. anchor: two chars, horizontal in
        {l,m,r} and vertical in {t,m,b}, applied to the *drawn* bounds
        (after rotation for rotated text)."""
        w, h = _text_size(s, size)
        if angle == 0.0:
            left = {"l": x, "m": x - w / 2.0, "r": x - w}[anchor[0]]
            top = {"t": y, "m": y - h / 2.0, "b": y - h}[anchor[1]]
            f = _font(size)
            l0, t0, _, _ = f.getbbox(s)
            self.draw.text((round(left) - l0, round(top) - t0), s, font=f, fill=color)
            box = BBox(left, top, left + w, top + h)
        else:
            f = _font(size)
            l0, t0, r0, b0 = f.getbbox(s)
            tile = Image.new("RGBA", (int(r0 - l0) + 2, int(b0 - t0) + 2), (0, 0, 0, 0))
            ImageDraw.Draw(tile).text((-l0 + 1, -t0 + 1), s, font=f, fill=color + (255,))
            rot = tile.rotate(angle, expand=True, resample=Image.BICUBIC)
            rw, rh = rot.size
            left = {"l": x, "m": x - rw / 2.0, "r": x - rw}[anchor[0]]
            top = {"t": y, "m": y - rh / 2.0, "b": y - rh}[anchor[1]]
            self.im.paste(rot, (round(left), round(top)), rot)
            box = BBox(left, top, left + rw, top + rh)
        rec = TextBox(s, box, angle=angle, role=role, group=group)
        self.texts.append(rec)
        return rec


def _nice_step(span: float, target_ticks: int = 5) -> float:
    raw = span / max(target_ticks - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mult * mag >= raw:
            return mult * mag
    return 10.0 * mag


def _fmt_value(v: float) -> str:
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:.4g}"


def _axis_from_anchors(orientation: str, p0: float, v0: float, p1: float, v1: float) -> AxisGT:
    slope = (v1 - v0) / (p1 - p0)
    return AxisGT(orientation, slope, v0 - slope * p0)


def _spec_noise_rng(spec: ChartSpec) -> np.random.Generator:
    digest = hashlib.sha256(spec.to_json().encode()).digest()[:8]
    return np.random.default_rng(int.from_bytes(digest, "little"))


def _apply_background_texture(cv: _Canvas) -> None:
    arr = np.asarray(cv.im, dtype=np.int16)
    h, w = arr.shape[:2]
    kind = cv.spec.style.texture_kind
    if kind == "stripes":
        ys = np.arange(h)
        band = ((ys // 10) % 2 == 0).astype(np.int16) * 8
        arr -= band[:, None, None]
    elif kind == "checker":
        ys, xs = np.mgrid[0:h, 0:w]
        band = (((ys // 14) + (xs // 14)) % 2 == 0).astype(np.int16) * 8
        arr -= band[:, :, None]
    else:  # noise
        rng = _spec_noise_rng(cv.spec)
        arr -= rng.integers(0, 9, size=(h, w, 1), dtype=np.int16)
    cv.im = Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8), "RGB")
    cv.draw = ImageDraw.Draw(cv.im)


def _stripe_region(cv: _Canvas, mask: Image.Image) -> None:
    """Darken diagonal bands of the masked region (procedural element texture)."""
    arr = np.asarray(cv.im, dtype=np.int16)
    m = np.asarray(mask, dtype=bool)
    h, w = arr.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    band = (((ys + xs) // 7) % 2 == 0) & m
    arr[band] -= 28
    cv.im = Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8), "RGB")
    cv.draw = ImageDraw.Draw(cv.im)


def _draw_border(cv: _Canvas) -> None:
    st = cv.spec.style
    if st.border_color is None:
        return
    col = st.border_color.as_tuple()
    s = cv.size
    if st.border_dashed:
        step = 12
        for x in range(2, s - 2, step):
            cv.draw.line([(x, 2), (min(x + 7, s - 3), 2)], fill=col, width=2)
            cv.draw.line([(x, s - 3), (min(x + 7, s - 3), s - 3)], fill=col, width=2)
        for y in range(2, s - 2, step):
            cv.draw.line([(2, y), (2, min(y + 7, s - 3))], fill=col, width=2)
            cv.draw.line([(s - 3, y), (s - 3, min(y + 7, s - 3))], fill=col, width=2)
    else:
        cv.draw.rectangle([2, 2, s - 3, s - 3], outline=col, width=2)


def _draw_legend(cv: _Canvas, entries: list[tuple[Color, str]], x_right: float, y_top: float) -> LegendGT:
    pad, swatch, row_h = 8, 12, 20
    tw = max(_text_size(t, SIZE_LABEL)[0] for _, t in entries)
    w = pad + swatch + 6 + tw + pad
    h = pad + row_h * len(entries)
    x0, y0 = x_right - w, y_top
    if x0 < 0 or y0 + h > cv.size:
        raise LayoutOverflow("legend does not fit")
    cv.draw.rectangle([round(x0), round(y0), round(x0 + w), round(y0 + h)],
                      fill=(255, 255, 255), outline=(120, 120, 120))
    out = []
    for i, (color, text) in enumerate(entries):
        sy = y0 + pad + i * row_h
        sx = x0 + pad
        cv.draw.rectangle([round(sx), round(sy), round(sx + swatch), round(sy + swatch)],
                          fill=color.as_tuple())
        cv.text(text, sx + swatch + 6, sy + swatch / 2.0, size=SIZE_LABEL, anchor="lm",
                role=ROLE_LEGEND_TEXT)
        out.append(LegendEntryGT(
            BBox(sx, sy, sx + swatch, sy + swatch), color, text))
    return LegendGT(BBox(x0, y0, x0 + w, y0 + h, category="legend"), tuple(out))


def _value_ticks(vmin: float, vmax: float, exponent: bool) -> tuple[list[tuple[float, str]], float, float]:
    """Tick (value, text) list plus the axis range actually used."""
    if exponent:
        e = math.ceil(math.log10(max(vmax, 1e-9)))
        top = 10.0 ** e
        ticks = [(top * f, _fmt_value(top * f)) for f in (0.0, 0.25, 0.5, 0.75)]
        ticks.append((top, f"10^{e}"))
        return ticks, min(vmin, 0.0), top
    lo = vmin
    hi = vmax + (vmax - vmin) * 0.06 + 1e-9
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9:
        ticks.append((v, _fmt_value(round(v, 10))))
        v += step
    if len(ticks) < 2:
        ticks = [(lo, _fmt_value(lo)), (hi, _fmt_value(hi))]
    return ticks, lo, max(hi, ticks[-1][0])


def _draw_value_tick_label(cv: _Canvas, tick_text: str, x: float, y: float, axis: str,
                           group_start: int) -> int:
    """Tick label placement; exponent ticks become a mantissa plus a raised
    smaller digit box. Returns the next free group id."""
    if tick_text.startswith("10^"):
        e_digits = tick_text[3:]
        mw, mh = _text_size("10", SIZE_TICK)
        ew, _ = _text_size(e_digits, SIZE_EXP)
        if axis == "y":
            # right-aligned block, vertically centered on the tick
            mrec = cv.text("10", x - ew - 2, y, size=SIZE_TICK, anchor="rm",
                           role=ROLE_EXP_MANTISSA, group=group_start)
            cv.text(e_digits, mrec.box.x_max + 2, mrec.box.y_min - 0.4 * mh, size=SIZE_EXP,
                    anchor="lt", role=ROLE_EXP_DIGIT, group=group_start)
        else:
            mrec = cv.text("10", x - (mw + ew + 2) / 2.0, y, size=SIZE_TICK, anchor="lt",
                           role=ROLE_EXP_MANTISSA, group=group_start)
            cv.text(e_digits, mrec.box.x_max + 2, mrec.box.y_min - 0.4 * mh, size=SIZE_EXP,
                    anchor="lt", role=ROLE_EXP_DIGIT, group=group_start)
        return group_start + 1
    role = ROLE_TICK_Y if axis == "y" else ROLE_TICK_X
    if axis == "y":
        cv.text(tick_text, x, y, size=SIZE_TICK, anchor="rm", role=role)
    else:
        cv.text(tick_text, x, y, size=SIZE_TICK, anchor="mt", role=role)
    return group_start


def _draw_decoys(cv: _Canvas, y: float, group: int) -> None:
    """Baseline-aligned '10 4' pair: must never be read as an exponent."""
    a = cv.text("10", 24, y, size=SIZE_TICK, anchor="lt", role=ROLE_DECOY, group=group)
    cv.text("4", a.box.x_max + 6, a.box.y_min, size=SIZE_TICK, anchor="lt",
            role=ROLE_DECOY, group=group)


def render(spec: ChartSpec, canvas_size: int = 512) -> tuple[Raster, GroundTruth]:
    """Rasterize a chart spec. Raises LayoutOverflow when the spec cannot
    be drawn legibly at this canvas size."""
    cv = _Canvas(spec, canvas_size)
    if spec.style.texture_background:
        _apply_background_texture(cv)
    _draw_border(cv)

    if spec.chart_type in ("vbar", "hbar"):
        gt = _render_bars(cv, spec)
    elif spec.chart_type == "pie":
        gt = _render_pie(cv, spec)
    elif spec.chart_type in ("line", "scatter"):
        gt = _render_xy(cv, spec)
    else:
        raise ValueError(f"unknown chart type {spec.chart_type!r}")
    return Raster(np.asarray(cv.im)), gt


def _frame(cv: _Canvas, legend_w: float, left: float) -> tuple[float, float, float, float]:
    s = cv.size
    top = 46.0
    bottom = s - 64.0
    right = s - 18.0 - legend_w
    if right - left < 120 or bottom - top < 120:
        raise LayoutOverflow("plot area too small")
    return left, top, right, bottom


def _titles(cv: _Canvas, spec: ChartSpec, px0, py0, px1, py1, with_x_title=True) -> None:
    cv.text(spec.title, (px0 + px1) / 2.0, 20, size=SIZE_TITLE, role=ROLE_TITLE)
    cv.text(spec.caption, cv.size / 2.0, cv.size - 12, size=SIZE_CAPTION, role=ROLE_CAPTION)
    if with_x_title:
        cv.text(spec.x_title, (px0 + px1) / 2.0, py1 + 34, size=SIZE_LABEL, role=ROLE_X_TITLE)
        cv.text(spec.y_title, 14, (py0 + py1) / 2.0, size=SIZE_LABEL, angle=90,
                role=ROLE_Y_TITLE)


def _render_bars(cv: _Canvas, spec: ChartSpec) -> GroundTruth:
    st = spec.style
    horizontal = spec.chart_type == "hbar"
    values = np.array([s.value for s in spec.series], dtype=np.float64)
    labels = [s.label for s in spec.series]
    vmax = float(values.max())

    ticks, vlo, vhi = _value_ticks(st.bar_bottom, vmax, st.exponent_ticks)
    ticks = [t for t in ticks if t[0] >= st.bar_bottom - 1e-9]
    vlo = st.bar_bottom

    if horizontal:
        label_w = max(_text_size(t, SIZE_LABEL)[0] for t in labels)
        left = 24.0 + label_w + 10.0
    else:
        tick_w = max(_text_size(t[1].replace("^", ""), SIZE_TICK)[0] for t in ticks)
        left = 34.0 + tick_w + 12.0
    legend_w = 120.0 if st.legend else 0.0
    px0, py0, px1, py1 = _frame(cv, legend_w, left)

    group = 0
    tick_gt: list[TickGT] = []
    if horizontal:
        x_axis = _axis_from_anchors("x", px0, vlo, px1, vhi)
        y_axis = None
        value_axis = x_axis
    else:
        y_axis = _axis_from_anchors("y", py1, vlo, py0, vhi)
        x_axis = None
        value_axis = y_axis

    if st.axes_visible:
        cv.draw.line([round(px0), round(py0), round(px0), round(py1)], fill=INK, width=2)
        cv.draw.line([round(px0), round(py1), round(px1), round(py1)], fill=INK, width=2)
        for v, text in ticks:
            if horizontal:
                px = (v - value_axis.intercept) / value_axis.slope
                cv.draw.line([round(px), round(py1), round(px), round(py1 + 5)], fill=INK, width=1)
                group = _draw_value_tick_label(cv, text, px, py1 + 8, "x", group)
                tick_gt.append(TickGT("x", px, v, text))
            else:
                py = (v - value_axis.intercept) / value_axis.slope
                cv.draw.line([round(px0 - 5), round(py), round(px0), round(py)], fill=INK, width=1)
                group = _draw_value_tick_label(cv, text, px0 - 9, py, "y", group)
                tick_gt.append(TickGT("y", py, v, text))

    n = len(values)
    span = (px1 - px0) if not horizontal else (py1 - py0)
    slot = span / n
    if slot < 18.0:
        raise LayoutOverflow("too many bars for the canvas")
    bar_w = slot * (1.0 - st.bar_gap)

    bars: list[BarGT] = []
    rows: list[Row] = []
    for i, (v, lab) in enumerate(zip(values, labels)):
        c = spec.colors[i]
        free_px = (v - value_axis.intercept) / value_axis.slope
        if horizontal:
            y_lo = py0 + i * slot + (slot - bar_w) / 2.0
            box = BBox(px0, y_lo, free_px, y_lo + bar_w, category="horizontal_bar")
        else:
            x_lo = px0 + i * slot + (slot - bar_w) / 2.0
            box = BBox(x_lo, free_px, x_lo + bar_w, py1, category="vertical_bar")
        cv.draw.rectangle([round(box.x_min), round(box.y_min), round(box.x_max), round(box.y_max)],
                          fill=c.as_tuple(), outline=(60, 60, 60))
        if st.texture_elements:
            mask = Image.new("L", cv.im.size, 0)
            ImageDraw.Draw(mask).rectangle(
                [round(box.x_min), round(box.y_min), round(box.x_max), round(box.y_max)], fill=255)
            _stripe_region(cv, mask)
        bars.append(BarGT(box, c, lab, float(v)))
        rows.append(Row(lab, float(v)))

        if not st.legend:
            if horizontal:
                cv.text(lab, px0 - 8, (box.y_min + box.y_max) / 2.0, size=SIZE_LABEL,
                        anchor="rm", role=ROLE_BAR_LABEL)
            else:
                cx = (box.x_min + box.x_max) / 2.0
                lw, _ = _text_size(lab, SIZE_LABEL)
                rot = st.x_label_rotation > 0 or lw > slot - 2
                if rot:
                    cv.text(lab, cx + 2, py1 + 7, size=SIZE_LABEL, anchor="rt", angle=45,
                            role=ROLE_BAR_LABEL)
                else:
                    cv.text(lab, cx, py1 + 8, size=SIZE_LABEL, anchor="mt", role=ROLE_BAR_LABEL)
        if st.value_on_bar:
            vtext = _fmt_value(round(v, 4))
            if horizontal:
                cv.text(vtext, box.x_max + 6, (box.y_min + box.y_max) / 2.0, size=SIZE_TICK,
                        anchor="lm", role=ROLE_VALUE_LABEL)
            else:
                cv.text(vtext, (box.x_min + box.x_max) / 2.0, box.y_min - 4, size=SIZE_TICK,
                        anchor="mb", role=ROLE_VALUE_LABEL)

    legend = None
    if st.legend:
        legend = _draw_legend(cv, list(zip(spec.colors, labels)), cv.size - 14.0, py0)
    _titles(cv, spec, px0, py0, px1, py1)
    if st.exponent_ticks:
        _draw_decoys(cv, cv.size - 30.0, group)

    table = ChartTable(
        chart_type=spec.chart_type,
        title=spec.title, caption=spec.caption, x_title=spec.x_title, y_title=spec.y_title,
        rows=tuple(rows),
    )
    region = BBox(px0 - 6, py0 - 6, px1 + 6, py1 + 6,
                  category=REGION_FOR_TYPE[spec.chart_type])
    return GroundTruth(
        table=table, chart_region=region,
        plot_rect=BBox(px0, py0, px1, py1, category="plot"),
        bars=tuple(bars), ticks=tuple(tick_gt), text_boxes=tuple(cv.texts),
        legend=legend, x_axis=x_axis, y_axis=y_axis, canvas_size=cv.size,
    )


def _render_pie(cv: _Canvas, spec: ChartSpec) -> GroundTruth:
    st = spec.style
    legend_mode = st.pie_label_mode == "legend"
    legend_w = 120.0 if legend_mode else 0.0
    s = cv.size
    cx = (s - legend_w) / 2.0
    cy = s / 2.0 + 10.0
    radius = min((s - legend_w) / 2.0, s / 2.0) - 78.0
    if radius < 60:
        raise LayoutOverflow("pie radius too small")

    fracs = [sr.value for sr in spec.series]
    labels = [sr.label for sr in spec.series]
    start = -90.0
    sectors: list[SectorGT] = []
    rows: list[Row] = []
    bb = [round(cx - radius), round(cy - radius), round(cx + radius), round(cy + radius)]
    for i, (f, lab) in enumerate(zip(fracs, labels)):
        end = start + f * 360.0
        cv.draw.pieslice(bb, start, end, fill=spec.colors[i].as_tuple(), outline=(40, 40, 40))
        sectors.append(SectorGT(start % 360.0, (start % 360.0) + f * 360.0,
                                spec.colors[i], lab, float(f)))
        rows.append(Row(lab, float(f)))
        start = end
    if st.texture_elements:
        mask = Image.new("L", cv.im.size, 0)
        ImageDraw.Draw(mask).ellipse(bb, fill=255)
        _stripe_region(cv, mask)

    legend = None
    if legend_mode:
        legend = _draw_legend(cv, list(zip(spec.colors, labels)), s - 14.0, 56.0)
    else:
        for sec in sectors:
            mid = math.radians((sec.start_angle + sec.end_angle) / 2.0)
            dx, dy = math.cos(mid), math.sin(mid)
            if st.pie_label_mode == "connector":
                p_in = (cx + 0.9 * radius * dx, cy + 0.9 * radius * dy)
                p_out = (cx + 1.2 * radius * dx, cy + 1.2 * radius * dy)
                cv.draw.line([round(p_in[0]), round(p_in[1]), round(p_out[0]), round(p_out[1])],
                             fill=INK, width=1)
                tx = p_out[0] + (8 if dx >= 0 else -8)
                cv.text(sec.label, tx, p_out[1], size=SIZE_LABEL,
                        anchor=("lm" if dx >= 0 else "rm"), role=ROLE_SECTOR_LABEL)
            else:  # adjacent
                span = sec.end_angle - sec.start_angle
                if span >= 60.0:
                    cv.text(sec.label, cx + 0.6 * radius * dx, cy + 0.6 * radius * dy,
                            size=SIZE_LABEL, role=ROLE_SECTOR_LABEL)
                else:
                    tx = cx + 1.18 * radius * dx + (6 if dx >= 0 else -6)
                    cv.text(sec.label, tx, cy + 1.18 * radius * dy, size=SIZE_LABEL,
                            anchor=("lm" if dx >= 0 else "rm"), role=ROLE_SECTOR_LABEL)

    cv.text(spec.title, cx, 20, size=SIZE_TITLE, role=ROLE_TITLE)
    cv.text(spec.caption, s / 2.0, s - 12, size=SIZE_CAPTION, role=ROLE_CAPTION)

    table = ChartTable(chart_type="pie", title=spec.title, caption=spec.caption,
                       rows=tuple(rows))
    region = BBox(cx - radius - 10, cy - radius - 10, cx + radius + 10, cy + radius + 10,
                  category="pie_chart")
    return GroundTruth(
        table=table, chart_region=region,
        pies=(PieGT((cx, cy), radius, tuple(sectors)),),
        text_boxes=tuple(cv.texts), legend=legend, canvas_size=cv.size,
    )


def _render_xy(cv: _Canvas, spec: ChartSpec) -> GroundTruth:
    st = spec.style
    all_pts = [p for s in spec.series for p in s.points]
    xs = np.array([p[0] for p in all_pts])
    ys = np.array([p[1] for p in all_pts])
    pad_x = (xs.max() - xs.min()) * 0.08 + 1e-9
    pad_y = (ys.max() - ys.min()) * 0.08 + 1e-9
    xticks, xlo, xhi = _value_ticks(xs.min() - pad_x, xs.max() + pad_x, False)
    # exponent mode snaps the top to the next power of ten, so padding the
    # high end would overshoot a whole decade for data just under one
    y_hi_in = ys.max() if st.exponent_ticks else ys.max() + pad_y
    yticks, ylo, yhi = _value_ticks(ys.min() - pad_y, y_hi_in, st.exponent_ticks)
    xlo = min(xlo, xticks[0][0])
    ylo = min(ylo, yticks[0][0])

    tick_w = max(_text_size(t[1].replace("^", ""), SIZE_TICK)[0] for t in yticks)
    left = 34.0 + tick_w + 12.0
    legend_w = 120.0 if st.legend else 0.0
    px0, py0, px1, py1 = _frame(cv, legend_w, left)

    x_axis = _axis_from_anchors("x", px0, xlo, px1, xhi)
    y_axis = _axis_from_anchors("y", py1, ylo, py0, yhi)

    cv.draw.line([round(px0), round(py0), round(px0), round(py1)], fill=INK, width=2)
    cv.draw.line([round(px0), round(py1), round(px1), round(py1)], fill=INK, width=2)
    group = 0
    tick_gt: list[TickGT] = []
    for v, text in xticks:
        px = (v - x_axis.intercept) / x_axis.slope
        if px < px0 - 1 or px > px1 + 1:
            continue
        cv.draw.line([round(px), round(py1), round(px), round(py1 + 5)], fill=INK, width=1)
        if st.x_label_rotation > 0:
            cv.text(text, px + 2, py1 + 8, size=SIZE_TICK, anchor="rt", angle=45, role=ROLE_TICK_X)
        else:
            group = _draw_value_tick_label(cv, text, px, py1 + 8, "x", group)
        tick_gt.append(TickGT("x", px, v, text))
    for v, text in yticks:
        py = (v - y_axis.intercept) / y_axis.slope
        if py < py0 - 1 or py > py1 + 1:
            continue
        cv.draw.line([round(px0 - 5), round(py), round(px0), round(py)], fill=INK, width=1)
        group = _draw_value_tick_label(cv, text, px0 - 9, py, "y", group)
        tick_gt.append(TickGT("y", py, v, text))

    def to_px(p: tuple[float, float]) -> tuple[float, float]:
        return ((p[0] - x_axis.intercept) / x_axis.slope,
                (p[1] - y_axis.intercept) / y_axis.slope)

    lines: list[LineGT] = []
    scatter_px: list[tuple[float, float]] = []
    series_out: list[Series] = []
    for i, sr in enumerate(spec.series):
        c = spec.colors[i]
        pts_px = [to_px(p) for p in sr.points]
        if spec.chart_type == "line":
            if st.dashed_lines:
                _draw_dashed_polyline(cv, pts_px, c.as_tuple())
            else:
                cv.draw.line([(round(x), round(y)) for x, y in pts_px], fill=c.as_tuple(), width=3)
            lines.append(LineGT(sr.label, c, tuple(pts_px), st.dashed_lines))
        else:
            for x, y in pts_px:
                cv.draw.ellipse([round(x - 4), round(y - 4), round(x + 4), round(y + 4)],
                                fill=c.as_tuple())
            scatter_px.extend(pts_px)
        series_out.append(Series(sr.label, tuple(sr.points)))

    legend = None
    if st.legend:
        legend = _draw_legend(cv, [(spec.colors[i], s.label) for i, s in enumerate(spec.series)],
                              cv.size - 14.0, py0)
    _titles(cv, spec, px0, py0, px1, py1)
    if st.exponent_ticks:
        _draw_decoys(cv, cv.size - 30.0, group)

    table = ChartTable(
        chart_type=spec.chart_type,
        title=spec.title, caption=spec.caption, x_title=spec.x_title, y_title=spec.y_title,
        series=tuple(series_out),
    )
    region = BBox(px0 - 6, py0 - 6, px1 + 6, py1 + 6,
                  category=REGION_FOR_TYPE[spec.chart_type])
    return GroundTruth(
        table=table, chart_region=region,
        plot_rect=BBox(px0, py0, px1, py1, category="plot"),
        lines=tuple(lines), scatter_points=tuple(scatter_px),
        ticks=tuple(tick_gt), text_boxes=tuple(cv.texts), legend=legend,
        x_axis=x_axis, y_axis=y_axis, canvas_size=cv.size,
    )


def _draw_dashed_polyline(cv: _Canvas, pts: list[tuple[float, float]], color) -> None:
    on, off = 9.0, 6.0
    phase = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        seg = math.hypot(x1 - x0, y1 - y0)
        if seg <= 0:
            continue
        ux, uy = (x1 - x0) / seg, (y1 - y0) / seg
        t = 0.0
        while t < seg:
            cycle = phase % (on + off)
            if cycle < on:
                run = min(on - cycle, seg - t)
                a = (x0 + ux * t, y0 + uy * t)
                b = (x0 + ux * (t + run), y0 + uy * (t + run))
                cv.draw.line([round(a[0]), round(a[1]), round(b[0]), round(b[1])],
                             fill=color, width=3)
            else:
                run = min(on + off - cycle, seg - t)
            t += run
            phase += run
