"""Shared helpers: deterministic chart + oracle round-trip fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from charter.oracle import NoiseConfig, simulate_detector, simulate_ocr
from charter.synth import DEFAULT_CONFIG, LayoutOverflow, render, sample_spec

CLEAN = NoiseConfig()
RESAMPLE_STRIDE = 10000


def render_chart(chart_type: str, seed: int, config=DEFAULT_CONFIG):
    """(raster, gt) with overflow-resampling identical to the pipeline's."""
    s = seed
    while True:
        try:
            spec = sample_spec(s, chart_type, config)
            return render(spec)
        except LayoutOverflow:
            s += RESAMPLE_STRIDE


def oracle_chart(chart_type: str, seed: int, noise: NoiseConfig = CLEAN,
                 config=DEFAULT_CONFIG):
    """(gt, detector output, ocr output, raster) for one chart."""
    raster, gt = render_chart(chart_type, seed, config)
    det = simulate_detector(gt, noise, seed)
    ocr = simulate_ocr(gt, noise, seed)
    return gt, det, ocr, raster


def make_token(text: str, cx: float, cy: float, w: float = 20.0, h: float = 12.0,
               angle: float = 0.0, superscript: bool = False):
    from charter.oracle import OcrToken

    x0, y0 = cx - w / 2.0, cy - h / 2.0
    x1, y1 = cx + w / 2.0, cy + h / 2.0
    return OcrToken(((x0, y0), (x1, y0), (x1, y1), (x0, y1)), angle, text, superscript)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0)
