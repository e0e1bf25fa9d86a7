"""Line polyline reconstruction and scatter decoding against ground truth."""

import numpy as np
import pytest

from charter.analysis import AxisModel, extract_lines, extract_scatter
from charter.analysis.errors import EmptyTableError
from charter.categories import HM_SCATTER_DOT
from charter.oracle import OcrOutput, simulate_detector, simulate_ocr
from charter.raster import Heatmap

from conftest import CLEAN, render_chart

X_AXIS = AxisModel("x", 0.25, -10.0, ((40.0, 0.0), (440.0, 100.0)))
Y_AXIS = AxisModel("y", -0.25, 110.0, ((40.0, 100.0), (440.0, 0.0)))
EMPTY_OCR = OcrOutput(())


def _dot_heatmap(points_raster):
    ys, xs = np.mgrid[0:128, 0:128].astype(np.float64)
    vals = np.zeros((128, 128))
    for px, py in points_raster:
        d2 = (xs - px / 4.0) ** 2 + (ys - py / 4.0) ** 2
        vals = np.maximum(vals, np.exp(-d2 / (2 * 2.0**2)))
    return Heatmap(vals, HM_SCATTER_DOT)


class TestExtractScatter:
    def test_decodes_peak_values(self):
        pts = [(100.0, 200.0), (300.0, 120.0)]
        got = extract_scatter({HM_SCATTER_DOT: _dot_heatmap(pts)},
                              {"x": X_AXIS, "y": Y_AXIS})
        assert len(got) == 2
        for (px, py), (gx, gy) in zip(sorted(pts), got):
            assert gx == pytest.approx(X_AXIS.value_at(px), abs=0.2)
            assert gy == pytest.approx(Y_AXIS.value_at(py), abs=0.2)

    def test_sorted_by_x_then_y(self):
        pts = [(300.0, 120.0), (100.0, 200.0), (100.0, 300.0)]
        got = extract_scatter({HM_SCATTER_DOT: _dot_heatmap(pts)},
                              {"x": X_AXIS, "y": Y_AXIS})
        assert got == sorted(got)

    def test_empty_heatmap_gives_empty_list(self):
        got = extract_scatter({HM_SCATTER_DOT: Heatmap.zeros(128, 128, HM_SCATTER_DOT)},
                              {"x": X_AXIS, "y": Y_AXIS})
        assert got == []

    def test_missing_axis_raises(self):
        hm = {HM_SCATTER_DOT: _dot_heatmap([(100.0, 200.0)])}
        with pytest.raises(EmptyTableError):
            extract_scatter(hm, {"x": X_AXIS, "y": None})

    def test_missing_heatmap_raises(self):
        with pytest.raises(EmptyTableError):
            extract_scatter({}, {"x": X_AXIS, "y": Y_AXIS})

    def test_round_trip_on_rendered_charts(self):
        for seed in range(5):
            raster, gt = render_chart("scatter", seed)
            det = simulate_detector(gt, CLEAN, seed)
            from charter.analysis import recover_axis
            ocr = simulate_ocr(gt, CLEAN, seed)
            axes = {"x": recover_axis(ocr, "x", det.heatmaps.get("x_tick")),
                    "y": recover_axis(ocr, "y", det.heatmaps.get("y_tick"))}
            got = extract_scatter(det.heatmaps, axes)
            want = sorted(gt.table.series[0].points)
            assert len(got) == len(want)
            xs = [p[0] for p in want]
            ys = [p[1] for p in want]
            tol_x = 0.01 * (max(xs) - min(xs))
            tol_y = 0.01 * (max(ys) - min(ys))
            for (gx, gy), (wx, wy) in zip(got, want):
                assert abs(gx - wx) <= tol_x
                assert abs(gy - wy) <= tol_y


class TestExtractLines:
    def test_missing_axes_raise(self):
        with pytest.raises(EmptyTableError):
            extract_lines(None, {}, {"x": None, "y": Y_AXIS}, EMPTY_OCR)

    def test_missing_stroke_heatmap_raises(self):
        with pytest.raises(EmptyTableError):
            extract_lines(None, {}, {"x": X_AXIS, "y": Y_AXIS}, EMPTY_OCR)

    def test_round_trip_on_rendered_charts(self):
        from charter.analysis import recover_axis

        total = matched = 0
        for seed in range(12):
            raster, gt = render_chart("line", seed)
            det = simulate_detector(gt, CLEAN, seed)
            ocr = simulate_ocr(gt, CLEAN, seed)
            axes = {"x": recover_axis(ocr, "x", det.heatmaps.get("x_tick")),
                    "y": recover_axis(ocr, "y", det.heatmaps.get("y_tick"))}
            legend = next((b for b in det.boxes if b.category == "legend"), None)
            series = extract_lines(raster, det.heatmaps, axes, ocr,
                                   legend_box=legend)
            got_pts = [p for s in series for p in s.points]
            all_x = [p[0] for s in gt.table.series for p in s.points]
            all_y = [p[1] for s in gt.table.series for p in s.points]
            tol_x = 0.015 * (max(all_x) - min(all_x))
            tol_y = 0.015 * (max(all_y) - min(all_y))
            for s in gt.table.series:
                for wx, wy in s.points:
                    total += 1
                    if any(abs(gx - wx) <= tol_x and abs(gy - wy) <= tol_y
                           for gx, gy in got_pts):
                        matched += 1
        assert matched / total >= 0.97

    def test_points_ascend_in_x(self):
        from charter.analysis import recover_axis

        raster, gt = render_chart("line", 1)
        det = simulate_detector(gt, CLEAN, 1)
        ocr = simulate_ocr(gt, CLEAN, 1)
        axes = {"x": recover_axis(ocr, "x", det.heatmaps.get("x_tick")),
                "y": recover_axis(ocr, "y", det.heatmaps.get("y_tick"))}
        for s in extract_lines(raster, det.heatmaps, axes, ocr):
            xs = [p[0] for p in s.points]
            assert xs == sorted(xs)
