"""Chart specification sampling: randomized but fully seed-deterministic."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from ..raster import Color

WORDS = (
    "alpha", "bravo", "cedar", "delta", "ember", "falcon", "gravel", "harbor",
    "indigo", "jasper", "kelp", "lumen", "maple", "nickel", "onyx", "pepper",
    "quartz", "raven", "slate", "timber", "umber", "velvet", "walnut", "xenon",
    "yarrow", "zephyr", "basil", "cobalt", "dune", "fern", "garnet", "heron",
    "iris", "juniper", "krill", "larch", "mica", "nectar", "ochre", "pine",
)

TITLE_WORDS = ("annual", "quarterly", "regional", "observed", "total", "relative",
               "average", "estimated", "projected", "measured")
NOUN_WORDS = ("output", "growth", "share", "volume", "density", "uptake",
              "coverage", "yield", "demand", "usage")

PIE_LABEL_MODES = ("legend", "connector", "adjacent")


@dataclass(frozen=True)
class SeriesSpec:
    label: str
    value: float | None = None  # bar height / pie fraction
    points: tuple[tuple[float, float], ...] | None = None  # line / scatter


@dataclass(frozen=True)
class StyleSpec:
    background: Color
    border_color: Color | None
    border_dashed: bool
    bar_gap: float
    bar_bottom: float
    axes_visible: bool
    legend: bool
    pie_label_mode: str
    texture_background: bool
    texture_elements: bool
    texture_kind: str  # stripes | checker | noise
    x_label_rotation: float  # degrees; 0 or 45
    value_on_bar: bool
    exponent_ticks: bool
    dashed_lines: bool


@dataclass(frozen=True)
class ChartSpec:
    chart_type: str
    series: tuple[SeriesSpec, ...]
    colors: tuple[Color, ...]
    style: StyleSpec
    title: str
    caption: str
    x_title: str
    y_title: str

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


def _color_distinct(c: Color, existing: list[Color], min_dist: int = 60) -> bool:
    # euclidean RGB distance, matching what downstream color matching uses
    for e in existing:
        if ((c.r - e.r) ** 2 + (c.g - e.g) ** 2 + (c.b - e.b) ** 2) < min_dist * min_dist:
            return False
    return True


def _sample_colors(rng: np.random.Generator, n: int, background: Color) -> tuple[Color, ...]:
    out: list[Color] = []
    guard = [background]
    while len(out) < n:
        c = Color(*(int(v) for v in rng.integers(20, 236, size=3)))
        if _color_distinct(c, guard, 60) and _color_distinct(c, out, 60):
            out.append(c)
    return tuple(out)


def _sample_labels(rng: np.random.Generator, n: int) -> list[str]:
    idx = rng.choice(len(WORDS), size=n, replace=False)
    return [WORDS[i] for i in idx]


def _sample_title(rng: np.random.Generator) -> str:
    return f"{TITLE_WORDS[rng.integers(len(TITLE_WORDS))]} {NOUN_WORDS[rng.integers(len(NOUN_WORDS))]}"


def _pie_fractions(rng: np.random.Generator, n: int, min_frac: float) -> np.ndarray:
    """Dirichlet draw, resampled until every slice clears the minimum, then
    normalized to sum exactly 1."""
    for _ in range(1000):
        f = rng.dirichlet(np.ones(n) * 2.0)
        if f.min() >= min_frac:
            f = f / f.sum()
            # push rounding remainder into the largest slice
            f[np.argmax(f)] += 1.0 - f.sum()
            return f
    raise RuntimeError("failed to sample pie fractions")


def sample_spec(seed: int, chart_type: str, config) -> ChartSpec:
    """Draw a randomized ChartSpec; deterministic for a fixed (seed, type, config)."""
    from ..categories import CHART_TYPES

    if chart_type not in CHART_TYPES:
        raise ValueError(f"unknown chart type {chart_type!r}")
    config.validate()
    rng = np.random.default_rng([seed, CHART_TYPES.index(chart_type), 0x43485254])

    background = Color(*(int(v) for v in rng.integers(225, 256, size=3)))
    border = None
    if rng.random() < config.border_prob:
        border = Color(*(int(v) for v in rng.integers(0, 120, size=3)))

    vmin_cfg, vmax_cfg = config.value_range
    exponent_ticks = chart_type in ("vbar", "hbar", "line", "scatter") and (
        rng.random() < config.exponent_ticks_prob
    )

    if chart_type in ("vbar", "hbar"):
        n = int(rng.integers(config.bar_series_range[0], config.bar_series_range[1] + 1))
        values = rng.uniform(vmin_cfg, vmax_cfg, size=n)
        labels = _sample_labels(rng, n)
        series = tuple(SeriesSpec(lab, value=float(v)) for lab, v in zip(labels, values))
        axes_visible = rng.random() >= config.hidden_axes_prob
        legend = rng.random() < config.bar_legend_prob
        value_on_bar = (not axes_visible) or (rng.random() < config.value_on_bar_prob)
        bar_bottom = float(rng.uniform(0.0, 0.4 * values.min())) if rng.random() < 0.5 else 0.0
    elif chart_type == "pie":
        n = int(rng.integers(config.pie_slices_range[0], config.pie_slices_range[1] + 1))
        fracs = _pie_fractions(rng, n, config.pie_min_fraction)
        labels = _sample_labels(rng, n)
        series = tuple(SeriesSpec(lab, value=float(f)) for lab, f in zip(labels, fracs))
        axes_visible = False
        legend = False  # pies use pie_label_mode instead
        value_on_bar = False
        bar_bottom = 0.0
    elif chart_type == "line":
        n = int(rng.integers(config.line_series_range[0], config.line_series_range[1] + 1))
        npts = int(rng.integers(config.line_points_range[0], config.line_points_range[1] + 1))
        labels = _sample_labels(rng, n)
        xs = np.sort(rng.uniform(vmin_cfg, vmax_cfg, size=npts))
        while np.any(np.diff(xs) < (vmax_cfg - vmin_cfg) * 0.05):
            xs = np.sort(rng.uniform(vmin_cfg, vmax_cfg, size=npts))
        out = []
        for lab in labels:
            ys = rng.uniform(vmin_cfg, vmax_cfg, size=npts)
            out.append(SeriesSpec(lab, points=tuple((float(x), float(y)) for x, y in zip(xs, ys))))
        series = tuple(out)
        axes_visible = True
        # a legend is the only place a line series' label appears, so even a
        # single-series chart gets one when the dice say so
        legend = rng.random() < config.line_legend_prob
        value_on_bar = False
        bar_bottom = 0.0
    elif chart_type == "scatter":
        npts = int(rng.integers(config.scatter_points_range[0], config.scatter_points_range[1] + 1))
        pts: list[tuple[float, float]] = []
        # separation enforced in value space assuming a ~350 px plot span
        min_sep = config.scatter_min_separation / 350.0 * (vmax_cfg - vmin_cfg)
        attempts = 0
        while len(pts) < npts and attempts < 10000:
            attempts += 1
            p = (float(rng.uniform(vmin_cfg, vmax_cfg)), float(rng.uniform(vmin_cfg, vmax_cfg)))
            if all(max(abs(p[0] - q[0]), abs(p[1] - q[1])) >= min_sep for q in pts):
                pts.append(p)
        series = (SeriesSpec(_sample_labels(rng, 1)[0], points=tuple(sorted(pts))),)
        axes_visible = True
        legend = False
        value_on_bar = False
        bar_bottom = 0.0
    else:  # pragma: no cover
        raise AssertionError

    colors = _sample_colors(rng, len(series), background)
    mode_idx = rng.choice(3, p=np.array(config.pie_label_mode_weights) / sum(config.pie_label_mode_weights))
    style = StyleSpec(
        background=background,
        border_color=border,
        border_dashed=rng.random() < config.dashed_border_prob,
        bar_gap=float(rng.uniform(*config.bar_gap_range)),
        bar_bottom=bar_bottom,
        axes_visible=axes_visible,
        legend=legend,
        pie_label_mode=PIE_LABEL_MODES[int(mode_idx)],
        texture_background=rng.random() < config.texture_background_prob,
        texture_elements=rng.random() < config.texture_elements_prob,
        texture_kind=("stripes", "checker", "noise")[int(rng.integers(3))],
        x_label_rotation=45.0 if rng.random() < config.x_label_rotation_prob else 0.0,
        value_on_bar=value_on_bar,
        exponent_ticks=exponent_ticks,
        dashed_lines=chart_type == "line" and rng.random() < config.dashed_line_prob,
    )
    title = _sample_title(rng)
    caption = f"{_sample_title(rng)} by {NOUN_WORDS[rng.integers(len(NOUN_WORDS))]}"
    return ChartSpec(
        chart_type=chart_type,
        series=series,
        colors=colors,
        style=style,
        title=title,
        caption=caption,
        x_title=NOUN_WORDS[rng.integers(len(NOUN_WORDS))],
        y_title=NOUN_WORDS[rng.integers(len(NOUN_WORDS))],
    )
