"""Chart type classification from stage-1 regions plus heatmap evidence."""

from __future__ import annotations

import numpy as np

from ..categories import (
    BOX_BAR_CHART,
    BOX_HBAR,
    BOX_VBAR,
    CHART_REGION_CATEGORIES,
    TYPE_EVIDENCE_HEATMAPS,
)
from ..geometry import BBox
from ..oracle import DetectorOutput
from .config import DEFAULT_ANALYSIS_CONFIG, AnalysisConfig
from .errors import NoChartError

_TYPE_FOR_REGION = {
    BOX_BAR_CHART: "bar",
    "pie_chart": "pie",
    "line_chart": "line",
    "scatter_chart": "scatter",
}


def classify_chart(
    det: DetectorOutput,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> tuple[str, BBox]:
    """(chart_type, region box). Chart type is one of the five concrete
    types; bar regions are split into vbar/hbar by the element boxes.
    Raises NoChartError when no region box clears the score threshold."""
    regions = [b for b in det.boxes
               if b.category in CHART_REGION_CATEGORIES
               and b.score >= config.chart_region_score_threshold]
    if not regions:
        raise NoChartError("no chart region above the score threshold")

    best_score = max(b.score for b in regions)
    top = [b for b in regions if b.score >= best_score - 1e-9]
    if len(top) == 1:
        region = top[0]
    else:
        # tie-break by total mass of the type's evidence heatmaps
        def evidence(b: BBox) -> float:
            t = _TYPE_FOR_REGION[b.category]
            key = "vbar" if t == "bar" else t
            return sum(float(det.heatmaps[c].values.sum())
                       for c in TYPE_EVIDENCE_HEATMAPS[key]
                       if c in det.heatmaps)
        region = max(top, key=evidence)

    kind = _TYPE_FOR_REGION[region.category]
    if kind != "bar":
        return kind, region
    n_v = sum(1 for b in det.boxes
              if b.category == BOX_VBAR and b.score >= config.box_score_threshold)
    n_h = sum(1 for b in det.boxes
              if b.category == BOX_HBAR and b.score >= config.box_score_threshold)
    return ("vbar" if n_v >= n_h else "hbar"), region
