"""Sampling configuration for the synthetic chart generator.

The ranges and probabilities below are the contract for what the generator
can produce; tests and evaluation batches pin their own configs where
reproducibility matters.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class SynthConfig:
    canvas_size: int = 512
    heatmap_resolution: int = 128
    splat_sigma: float = 2.0  # heatmap pixels

    # Series counts / data ranges.
    bar_series_range: tuple[int, int] = (2, 7)
    pie_slices_range: tuple[int, int] = (3, 6)
    pie_min_fraction: float = 0.1
    line_series_range: tuple[int, int] = (1, 3)
    line_points_range: tuple[int, int] = (3, 7)
    scatter_points_range: tuple[int, int] = (6, 22)
    scatter_min_separation: float = 22.0  # raster px, keeps dots resolvable
    value_range: tuple[float, float] = (10.0, 100.0)

    # Style probabilities.
    hidden_axes_prob: float = 0.15  # bar charts only; values printed on bars
    bar_legend_prob: float = 0.25
    line_legend_prob: float = 1.0  # multi-series line charts keep a legend
    pie_label_mode_weights: tuple[float, float, float] = (0.34, 0.33, 0.33)  # legend/connector/adjacent
    border_prob: float = 0.5
    dashed_border_prob: float = 0.3
    texture_background_prob: float = 0.2
    texture_elements_prob: float = 0.0
    x_label_rotation_prob: float = 0.25
    exponent_ticks_prob: float = 0.12
    dashed_line_prob: float = 0.3
    value_on_bar_prob: float = 0.2  # in addition to forced-on when axes hidden

    # Layout.
    bar_gap_range: tuple[float, float] = (0.15, 0.5)  # fraction of slot width
    min_bar_slot_px: float = 18.0

    def validate(self) -> None:
        for lo, hi in (
            self.bar_series_range,
            self.pie_slices_range,
            self.line_series_range,
            self.line_points_range,
            self.scatter_points_range,
        ):
            if not (1 <= lo <= hi):
                raise ValueError(f"invalid count range ({lo}, {hi})")
        if not (2 <= self.pie_slices_range[0]):
            raise ValueError("pie charts need at least 2 slices")
        if self.pie_min_fraction * self.pie_slices_range[1] >= 1.0:
            raise ValueError("pie_min_fraction too large for the slice count range")
        probs = (
            self.hidden_axes_prob,
            self.bar_legend_prob,
            self.line_legend_prob,
            self.border_prob,
            self.dashed_border_prob,
            self.texture_background_prob,
            self.texture_elements_prob,
            self.x_label_rotation_prob,
            self.exponent_ticks_prob,
            self.dashed_line_prob,
            self.value_on_bar_prob,
        )
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.canvas_size % self.heatmap_resolution != 0:
            raise ValueError("heatmap resolution must divide the canvas size")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """Stable hash of the config, recorded in dataset manifests."""
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name in d:
                v = d[f.name]
                kwargs[f.name] = tuple(v) if isinstance(v, list) else v
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg


# Texture off on elements so color-based legend matching stays exercised by
# default; evaluation batches that need fully uniform charts pin their own.
DEFAULT_CONFIG = SynthConfig()
