"""End-to-end analysis: classification, full tables, the box-only pie path."""

import pytest

from charter.analysis import (
    NoChartError,
    analyze,
    analyze_pie_boxes,
    classify_chart,
)
from charter.categories import REGION_FOR_TYPE
from charter.geometry import BBox
from charter.oracle import DetectorOutput

from conftest import oracle_chart

ALL_TYPES = ("vbar", "hbar", "pie", "line", "scatter")


class TestClassifyChart:
    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_correct_type_on_clean_oracle(self, chart_type):
        for seed in range(4):
            _, det, _, _ = oracle_chart(chart_type, seed)
            kind, region = classify_chart(det)
            assert kind == chart_type
            assert region.category == REGION_FOR_TYPE[chart_type]

    def test_no_region_raises(self):
        det = DetectorOutput(boxes=(), heatmaps={})
        with pytest.raises(NoChartError):
            classify_chart(det)

    def test_low_score_region_raises(self):
        det = DetectorOutput(
            boxes=(BBox(0, 0, 100, 100, category="bar_chart", score=0.1),),
            heatmaps={})
        with pytest.raises(NoChartError):
            classify_chart(det)


class TestAnalyze:
    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_table_shape_per_type(self, chart_type):
        gt, det, ocr, raster = oracle_chart(chart_type, 1)
        table = analyze(det, ocr, raster)
        assert table.chart_type == chart_type
        if chart_type in ("vbar", "hbar", "pie"):
            assert len(table.rows) == len(gt.table.rows)
            assert not table.series
        else:
            assert table.series and not table.rows

    def test_titles_recovered(self):
        gt, det, ocr, raster = oracle_chart("vbar", 0)
        table = analyze(det, ocr, raster)
        assert table.title == gt.table.title
        assert table.caption == gt.table.caption

    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_deterministic(self, chart_type):
        _, det, ocr, raster = oracle_chart(chart_type, 2)
        assert analyze(det, ocr, raster).to_json() == analyze(det, ocr, raster).to_json()

    def test_pie_fractions_sum_to_one(self):
        for seed in range(4):
            gt, det, ocr, raster = oracle_chart("pie", seed)
            table = analyze(det, ocr, raster)
            assert sum(r.value for r in table.rows) == pytest.approx(1.0)

    def test_pie_labels_match_gt(self):
        gt, det, ocr, raster = oracle_chart("pie", 0)
        table = analyze(det, ocr, raster)
        assert {r.label for r in table.rows} == {r.label for r in gt.table.rows}


class TestAnalyzePieBoxes:
    def test_rows_normalized(self):
        _, det, ocr, raster = oracle_chart("pie", 2)
        table = analyze_pie_boxes(det, ocr, raster)
        assert table.chart_type == "pie"
        assert sum(r.value for r in table.rows) == pytest.approx(1.0)

    def test_coarser_than_heatmap_path(self):
        # the two paths share labeling; geometry from boxes alone is the
        # ablation baseline and may split sectors differently
        _, det, ocr, raster = oracle_chart("pie", 2)
        heat = analyze(det, ocr, raster)
        box = analyze_pie_boxes(det, ocr, raster)
        assert heat.rows and box.rows

    def test_deterministic(self):
        _, det, ocr, raster = oracle_chart("pie", 5)
        assert analyze_pie_boxes(det, ocr, raster).to_json() \
            == analyze_pie_boxes(det, ocr, raster).to_json()
