"""Chart-to-table extraction: synthetic chart generation with exact ground
truth, a detector/OCR oracle, heatmap-based analysis, and evaluation."""

from .analysis import AnalysisConfig, analyze, analyze_pie_boxes
from .geometry import BBox, Point
from .metrics import (
    AblationReport,
    EvalReport,
    MatchPolicy,
    ablation_report,
    detection_ap,
    levenshtein_ratio,
    normalize_label,
    value_accuracy,
)
from .oracle import DetectorOutput, NoiseConfig, OcrOutput, simulate_detector, simulate_ocr
from .raster import Color, Heatmap, Raster
from .synth import ChartSpec, GroundTruth, SynthConfig, emit_heatmaps, render, sample_spec
from .table import ChartTable, Row, Series

__version__ = "0.1.0"

__all__ = [
    "AblationReport",
    "AnalysisConfig",
    "BBox",
    "ChartSpec",
    "ChartTable",
    "Color",
    "DetectorOutput",
    "EvalReport",
    "GroundTruth",
    "Heatmap",
    "MatchPolicy",
    "NoiseConfig",
    "OcrOutput",
    "Point",
    "Raster",
    "Row",
    "Series",
    "SynthConfig",
    "ablation_report",
    "analyze",
    "analyze_pie_boxes",
    "detection_ap",
    "emit_heatmaps",
    "levenshtein_ratio",
    "normalize_label",
    "render",
    "sample_spec",
    "simulate_detector",
    "simulate_ocr",
    "value_accuracy",
]
