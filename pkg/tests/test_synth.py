"""Synthetic generator: determinism, ground-truth consistency, heatmaps."""

import dataclasses

import pytest

from charter.categories import (
    HEATMAP_CATEGORIES,
    HM_LINE_KNEE,
    HM_PIE_CENTER,
    HM_SCATTER_DOT,
    HM_X_TICK,
)
from charter.geometry import local_maxima, refine_peak
from charter.synth import (
    DEFAULT_CONFIG,
    GroundTruth,
    emit_heatmaps,
    render,
    sample_spec,
)

from conftest import render_chart

ALL_TYPES = ("vbar", "hbar", "pie", "line", "scatter")


class TestSampleSpec:
    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_deterministic(self, chart_type):
        a = sample_spec(7, chart_type, DEFAULT_CONFIG)
        b = sample_spec(7, chart_type, DEFAULT_CONFIG)
        assert a.to_json() == b.to_json()

    def test_seeds_differ(self):
        assert sample_spec(0, "vbar", DEFAULT_CONFIG).to_json() \
            != sample_spec(1, "vbar", DEFAULT_CONFIG).to_json()

    def test_unknown_type(self):
        with pytest.raises(ValueError):
            sample_spec(0, "area", DEFAULT_CONFIG)

    def test_pie_fractions_sum_to_one(self):
        for seed in range(20):
            spec = sample_spec(seed, "pie", DEFAULT_CONFIG)
            total = sum(s.value for s in spec.series)
            assert abs(total - 1.0) < 1e-12
            assert all(s.value >= DEFAULT_CONFIG.pie_min_fraction for s in spec.series)

    def test_colors_mutually_distinct(self):
        for seed in range(20):
            for t in ALL_TYPES:
                spec = sample_spec(seed, t, DEFAULT_CONFIG)
                cols = spec.colors
                for i, a in enumerate(cols):
                    for b in cols[i + 1:]:
                        d = ((a.r - b.r) ** 2 + (a.g - b.g) ** 2 + (a.b - b.b) ** 2) ** 0.5
                        assert d >= 60.0


class TestRender:
    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_deterministic(self, chart_type):
        r1, g1 = render_chart(chart_type, 3)
        r2, g2 = render_chart(chart_type, 3)
        assert r1 == r2
        assert g1.to_json() == g2.to_json()

    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_gt_json_round_trip(self, chart_type):
        _, gt = render_chart(chart_type, 5)
        back = GroundTruth.from_dict(
            __import__("json").loads(gt.to_json()))
        assert back.to_json() == gt.to_json()

    def test_tick_values_match_axis_model(self):
        _, gt = render_chart("vbar", 1)
        for t in gt.ticks:
            axis = gt.x_axis if t.axis == "x" else gt.y_axis
            assert abs(axis.slope * t.pixel + axis.intercept - t.value) < 1e-9

    def test_bar_geometry_matches_table(self):
        _, gt = render_chart("vbar", 2)
        rows = {r.label: r.value for r in gt.table.rows}
        for bar in gt.bars:
            top_value = gt.y_axis.slope * bar.box.y_min + gt.y_axis.intercept
            assert abs(top_value - rows[bar.label]) < 1e-6

    def test_pie_sectors_match_table(self):
        _, gt = render_chart("pie", 0)
        (pie,) = gt.pies
        assert abs(sum(s.end_angle - s.start_angle for s in pie.sectors) - 360.0) < 1e-9
        for sector, row in zip(pie.sectors, gt.table.rows):
            assert sector.label == row.label
            assert abs(sector.fraction - row.value) < 1e-12

    def test_line_vertices_match_series(self):
        _, gt = render_chart("line", 0)
        for line, series in zip(gt.lines, gt.table.series):
            assert line.label == series.label
            for (vx, vy), (x, y) in zip(line.vertices, series.points):
                assert abs(gt.x_axis.slope * vx + gt.x_axis.intercept - x) < 1e-9
                assert abs(gt.y_axis.slope * vy + gt.y_axis.intercept - y) < 1e-9

    def test_text_boxes_within_canvas(self):
        for t in ALL_TYPES:
            _, gt = render_chart(t, 4)
            for tb in gt.text_boxes:
                assert tb.box.x_min >= 0 and tb.box.y_min >= 0
                assert tb.box.x_max <= gt.canvas_size and tb.box.y_max <= gt.canvas_size


class TestEmitHeatmaps:
    def test_all_categories_present(self):
        _, gt = render_chart("pie", 1)
        hms = emit_heatmaps(gt)
        assert set(hms) == set(HEATMAP_CATEGORIES)
        # a unit splat whose continuous center lands between grid cells
        # samples below 1.0; worst case for sigma=2 is ~0.94
        assert hms[HM_PIE_CENTER].values.max() > 0.9
        assert hms[HM_SCATTER_DOT].values.max() == 0.0  # no scatter elements

    def test_resolution_must_divide(self):
        _, gt = render_chart("vbar", 0)
        with pytest.raises(ValueError):
            emit_heatmaps(gt, resolution=100)

    def test_splat_peaks_at_fiducials(self):
        _, gt = render_chart("scatter", 3)
        hms = emit_heatmaps(gt)
        hm = hms[HM_SCATTER_DOT]
        scale = gt.canvas_size / hm.width
        peaks = [refine_peak(hm, p) for p in local_maxima(hm, 0.3, 2)]
        assert len(peaks) == len(gt.scatter_points)
        for gx, gy in gt.scatter_points:
            best = min(((p.x * scale - gx) ** 2 + (p.y * scale - gy) ** 2) ** 0.5
                       for p in peaks)
            assert best < 0.5  # sub-pixel in raster units

    def test_tick_heatmap_columns(self):
        _, gt = render_chart("vbar", 6)
        hms = emit_heatmaps(gt)
        hm = hms[HM_X_TICK]
        scale = gt.canvas_size / hm.width
        xt = [t for t in gt.ticks if t.axis == "x"]
        peaks = [refine_peak(hm, p) for p in local_maxima(hm, 0.3, 2)]
        assert len(peaks) == len(xt)
        for t in xt:
            assert min(abs(p.x * scale - t.pixel) for p in peaks) < 0.5

    def test_knee_count_matches_vertices(self):
        _, gt = render_chart("line", 7)
        hms = emit_heatmaps(gt)
        hm = hms[HM_LINE_KNEE]
        # distinct vertex positions may blend; peaks never exceed vertices
        vertices = {v for ln in gt.lines for v in ln.vertices}
        peaks = local_maxima(hm, 0.3, 1)
        assert 0 < len(peaks) <= len(vertices)


class TestConfig:
    def test_validate_rejects_bad_ranges(self):
        cfg = dataclasses.replace(DEFAULT_CONFIG, bar_series_range=(5, 2))
        with pytest.raises(ValueError):
            cfg.validate()

    def test_custom_config_flows_through(self):
        cfg = dataclasses.replace(DEFAULT_CONFIG, pie_slices_range=(3, 3))
        for seed in range(5):
            spec = sample_spec(seed, "pie", cfg)
            assert len(spec.series) == 3
