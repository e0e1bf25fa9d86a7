"""Tunables for the analysis stage, in one place with pinned defaults."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class AnalysisConfig:
    # Heatmap decoding.
    heatmap_threshold: float = 0.3
    peak_min_distance: int = 4  # heatmap px
    heatmap_scale: float = 4.0  # raster px per heatmap px

    # Axis recovery (1-D Hough binning of numeric OCR tokens).
    axis_bin_height_factor: float = 0.5  # bin width = factor * median token height
    axis_residual_tolerance_px: float = 1.5
    axis_min_span_px: float = 40.0
    tick_snap_distance_px: float = 6.0

    # Bar filtering.
    bar_width_tolerance: float = 0.3  # fraction of median width
    baseline_tolerance_px: float = 2.0
    bar_label_search_px: float = 46.0
    value_on_bar_search_px: float = 26.0

    # Legend color matching.
    legend_color_max_distance: float = 60.0
    legend_swatch_min_area: int = 40
    legend_swatch_max_area: int = 900

    # Pie fitting.
    pie_min_radius: float = 8.0  # in heatmap pixels
    pie_ring_band: float = 1.5
    pie_circumference_min_fraction: float = 0.3  # of 2*pi*r
    sector_peak_fraction: float = 0.4
    sector_merge_deg: float = 4.0
    connector_max_area_fraction: float = 0.02  # of pi*r^2

    # Line extraction.
    line_color_merge_distance: float = 40.0
    line_stitch_gap_px: float = 10.0
    line_stitch_slope_deg: float = 45.0
    line_min_cluster_px: int = 40
    knee_snap_distance_px: float = 9.0

    # Proposal filtering / classification.
    box_score_threshold: float = 0.2
    chart_region_score_threshold: float = 0.25
    background_color_distance: float = 40.0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


DEFAULT_ANALYSIS_CONFIG = AnalysisConfig()
