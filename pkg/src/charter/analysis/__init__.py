"""Stage-4 analysis: turn detector boxes, heatmaps, and OCR tokens into a
ChartTable. `analyze` is pure and deterministic; per-chart failures raise
structured ChartAnalysisError subclasses."""

from __future__ import annotations

from ..categories import (
    BOX_CAPTION,
    BOX_LEGEND,
    BOX_TITLE,
    BOX_X_LABEL,
    BOX_Y_LABEL,
    HM_LINE_KNEE,
    HM_PIE_CIRCUMFERENCE,
    HM_PIE_RADIAL,
    HM_PIE_SECTOR_CORNER,
    HM_X_TICK,
    HM_Y_TICK,
)
from ..geometry import BBox
from ..oracle import DetectorOutput, OcrOutput
from ..raster import Raster
from ..table import PROV_AXIS, ChartTable, Row, Series
from .axis import AxisModel, recover_axis
from .bars import BarExtract, extract_bars, match_legend
from .classify import classify_chart
from .config import DEFAULT_ANALYSIS_CONFIG, AnalysisConfig
from .errors import ChartAnalysisError, EmptyTableError, NoChartError
from .lines import SeriesExtract, extract_lines, extract_scatter
from .pies import PieGeometry, Sector, extract_sectors, fit_pies, label_sectors, pie_from_boxes

__all__ = [
    "AnalysisConfig",
    "AxisModel",
    "BarExtract",
    "ChartAnalysisError",
    "DEFAULT_ANALYSIS_CONFIG",
    "EmptyTableError",
    "NoChartError",
    "PieGeometry",
    "Sector",
    "SeriesExtract",
    "analyze",
    "analyze_pie_boxes",
    "classify_chart",
    "extract_bars",
    "extract_lines",
    "extract_scatter",
    "extract_sectors",
    "fit_pies",
    "label_sectors",
    "match_legend",
    "pie_from_boxes",
    "recover_axis",
]


def _best_box(det: DetectorOutput, category: str) -> BBox | None:
    cands = [b for b in det.boxes if b.category == category]
    return max(cands, key=lambda b: b.score) if cands else None


def _text_in_box(box: BBox | None, ocr: OcrOutput) -> str | None:
    """Joined text of the tokens whose centers sit in a stage-1 box."""
    if box is None:
        return None
    toks = [t for t in ocr.tokens
            if box.x_min - 2 <= t.box.center.x <= box.x_max + 2
            and box.y_min - 2 <= t.box.center.y <= box.y_max + 2]
    if not toks:
        return None
    vertical = all(abs(abs(t.angle) - 90.0) < 5.0 for t in toks)
    toks.sort(key=(lambda t: -t.box.center.y) if vertical else (lambda t: t.box.center.x))
    return " ".join(t.text for t in toks)


def _recover_axes(det: DetectorOutput, ocr: OcrOutput, config: AnalysisConfig,
                  x_title: str | None, y_title: str | None) -> dict[str, AxisModel | None]:
    return {
        "x": recover_axis(ocr, "x", det.heatmaps.get(HM_X_TICK), config, x_title),
        "y": recover_axis(ocr, "y", det.heatmaps.get(HM_Y_TICK), config, y_title),
    }


def analyze(
    det: DetectorOutput,
    ocr: OcrOutput,
    raster: Raster,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> ChartTable:
    chart_type, _region = classify_chart(det, config)

    title = _text_in_box(_best_box(det, BOX_TITLE), ocr)
    caption = _text_in_box(_best_box(det, BOX_CAPTION), ocr)
    x_title = _text_in_box(_best_box(det, BOX_X_LABEL), ocr)
    y_title = _text_in_box(_best_box(det, BOX_Y_LABEL), ocr)
    legend_box = _best_box(det, BOX_LEGEND)

    rows: tuple[Row, ...] = ()
    series: tuple[Series, ...] = ()

    if chart_type in ("vbar", "hbar"):
        axes = _recover_axes(det, ocr, config, x_title, y_title)
        bars = extract_bars(det.boxes, axes, ocr, raster, config)
        rows = tuple(Row(b.label, b.value, b.value_provenance) for b in bars)
    elif chart_type == "pie":
        rows = tuple(_pie_rows(det, ocr, raster, config, legend_box))
    elif chart_type == "line":
        axes = _recover_axes(det, ocr, config, x_title, y_title)
        extracted = extract_lines(raster, det.heatmaps, axes, ocr, legend_box, config)
        series = tuple(Series(s.label, s.points, s.label_provenance) for s in extracted)
    else:  # scatter
        axes = _recover_axes(det, ocr, config, x_title, y_title)
        pts = extract_scatter(det.heatmaps, axes, config)
        if not pts:
            raise EmptyTableError("no scatter dots recovered")
        series = (Series("points", tuple(pts), PROV_AXIS),)

    return ChartTable(
        chart_type=chart_type,
        title=title,
        caption=caption,
        x_title=x_title,
        y_title=y_title,
        rows=rows,
        series=series,
    )


def _pie_rows(det: DetectorOutput, ocr: OcrOutput, raster: Raster,
              config: AnalysisConfig, legend_box: BBox | None) -> list[Row]:
    pies = fit_pies(det.heatmaps, config, scale=config.heatmap_scale)
    if not pies:
        raise EmptyTableError("no pie supported by the circumference heatmap")
    geom = pies[0]  # strongest ring
    sectors = extract_sectors(
        geom,
        det.heatmaps.get(HM_PIE_RADIAL),
        det.heatmaps.get(HM_PIE_SECTOR_CORNER),
        config,
        scale=config.heatmap_scale,
    )
    geom = PieGeometry(geom.center, geom.radius, tuple(sectors))
    return _rows_from_pie(geom, raster, ocr, legend_box, config)


def _rows_from_pie(geom: PieGeometry, raster: Raster, ocr: OcrOutput,
                   legend_box: BBox | None, config: AnalysisConfig) -> list[Row]:
    # order to match the drawing convention: first boundary nearest 12 o'clock
    sectors = list(geom.sectors)
    start = min(range(len(sectors)),
                key=lambda i: (sectors[i].start_angle - 270.0) % 360.0)
    sectors = sectors[start:] + sectors[:start]
    geom = PieGeometry(geom.center, geom.radius, tuple(sectors))

    labels = label_sectors(geom, raster, ocr, legend_box, config)
    fractions = [s.span / 360.0 for s in geom.sectors]
    total = sum(fractions)
    fractions = [f / total for f in fractions]
    return [Row(lab, frac, prov)
            for (lab, prov), frac in zip(labels, fractions)]


def analyze_pie_boxes(
    det: DetectorOutput,
    ocr: OcrOutput,
    raster: Raster,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> ChartTable:
    """Box-only ablation path: the pie geometry comes from the detector's
    sector boxes alone, heatmaps unused; labeling and row assembly match
    `analyze` so the two paths differ only in geometry recovery."""
    title = _text_in_box(_best_box(det, BOX_TITLE), ocr)
    caption = _text_in_box(_best_box(det, BOX_CAPTION), ocr)
    legend_box = _best_box(det, BOX_LEGEND)
    geom = pie_from_boxes(det.boxes, config)
    if geom is None:
        raise EmptyTableError("no accepted pie sector boxes")
    rows = tuple(_rows_from_pie(geom, raster, ocr, legend_box, config))
    return ChartTable(chart_type="pie", title=title, caption=caption, rows=rows)
