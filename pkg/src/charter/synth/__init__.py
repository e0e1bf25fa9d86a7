"""Synthetic chart generation with exact ground truth."""

from .config import DEFAULT_CONFIG, SynthConfig
from .gt import GroundTruth
from .heatmaps import emit_heatmaps
from .render import LayoutOverflow, render
from .spec import ChartSpec, sample_spec

__all__ = [
    "ChartSpec",
    "DEFAULT_CONFIG",
    "GroundTruth",
    "LayoutOverflow",
    "SynthConfig",
    "emit_heatmaps",
    "render",
    "sample_spec",
]
