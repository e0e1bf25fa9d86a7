"""Axis recovery from numeric OCR tokens: fits, outliers, guards, snapping."""

import math

import numpy as np
import pytest

from charter.analysis import AxisModel, recover_axis
from charter.oracle import OcrOutput, simulate_ocr
from charter.raster import Heatmap

from conftest import CLEAN, make_token, render_chart


def _ocr(*tokens):
    return OcrOutput(tokens=tuple(tokens))


def _y_ticks(values, pixels, x=40.0):
    return [make_token(str(v), x, p) for v, p in zip(values, pixels)]


class TestRecoverAxis:
    def test_simple_y_axis(self):
        # [DERIVED] ticks 0..30 at y = 400..100: value = -0.1 * y + 40
        ocr = _ocr(*_y_ticks([0, 10, 20, 30], [400, 300, 200, 100]))
        ax = recover_axis(ocr, "y")
        assert ax is not None
        assert math.isclose(ax.slope, -0.1)
        assert math.isclose(ax.intercept, 40.0)
        assert math.isclose(ax.pixel_at(15.0), 250.0)

    def test_simple_x_axis(self):
        ocr = _ocr(*[make_token(str(v), 100 + 50 * i, 430)
                     for i, v in enumerate([0, 5, 10, 15])])
        ax = recover_axis(ocr, "x")
        assert ax is not None
        assert math.isclose(ax.value_at(100.0), 0.0, abs_tol=1e-9)
        assert math.isclose(ax.value_at(250.0), 15.0)

    def test_off_line_outlier_ignored(self):
        # a stray numeric token in the tick column must not bend the fit
        toks = _y_ticks([0, 10, 20, 30], [400, 300, 200, 100])
        toks.append(make_token("999", 40, 250))
        ax = recover_axis(_ocr(*toks), "y")
        assert math.isclose(ax.slope, -0.1)
        assert len(ax.support) == 4

    def test_other_column_ignored(self):
        # numeric text elsewhere on the page sits in a different Hough bin
        toks = _y_ticks([0, 10, 20, 30], [400, 300, 200, 100])
        toks += [make_token("7", 300, 90), make_token("3", 300, 210)]
        ax = recover_axis(_ocr(*toks), "y")
        assert math.isclose(ax.slope, -0.1)

    def test_min_span_guard(self):
        # two ticks 20 px apart span less than axis_min_span_px: stray text
        ocr = _ocr(*_y_ticks([10, 20], [220, 200]))
        assert recover_axis(ocr, "y") is None

    def test_too_few_numeric_tokens(self):
        assert recover_axis(_ocr(make_token("5", 40, 100)), "y") is None
        assert recover_axis(_ocr(make_token("a", 40, 100), make_token("b", 40, 200)), "y") is None

    def test_bad_orientation(self):
        with pytest.raises(ValueError):
            recover_axis(_ocr(), "z")

    def test_rotated_x_labels_anchor_at_right_edge(self):
        # 45-degree labels hang below-left of their tick: the box's right
        # edge, not its center, carries the tick position
        toks = [make_token(str(v), 100 + 50 * i, 440, w=30, h=30, angle=45.0)
                for i, v in enumerate([0, 10, 20, 30])]
        ax = recover_axis(_ocr(*toks), "x")
        assert ax is not None
        assert math.isclose(ax.value_at(115.0), 0.0, abs_tol=1e-9)  # box right edge = cx + 15

    def test_tick_snap_to_heatmap(self):
        # token centers are 2 px off the true ticks; a tick heatmap pulls
        # the support pixels back onto them
        true_px = [100.0, 200.0, 300.0, 400.0]
        vals = np.zeros((128, 128), dtype=np.float32)
        for px in true_px:
            c = px / 4.0
            xs = np.arange(128)
            vals[107] = np.maximum(vals[107], np.exp(-((xs - c) ** 2) / (2 * 2.0**2)))
        hm = Heatmap(vals, "x_tick")
        toks = [make_token(str(v), px + 2.0, 440)
                for v, px in zip([0, 10, 20, 30], true_px)]
        ax = recover_axis(_ocr(*toks), "x", tick_heatmap=hm)
        assert ax is not None
        for px, v in zip(true_px, [0, 10, 20, 30]):
            assert abs(ax.value_at(px) - v) < 0.05

    def test_exponent_top_tick(self):
        # [DERIVED] a "10" mantissa with a raised digit reads as 10^3 and the
        # digit is consumed, so linear ticks below plus the power tick at the
        # top fit one affine model
        toks = _y_ticks([0, 250, 500, 750], [400, 325, 250, 175])
        toks.append(make_token("10", 40, 100, w=20, h=12))
        toks.append(make_token("3", 56, 92, w=8, h=8))
        ax = recover_axis(_ocr(*toks), "y")
        assert ax is not None
        assert math.isclose(ax.value_at(100.0), 1000.0)
        assert math.isclose(ax.value_at(400.0), 0.0, abs_tol=1e-9)
        assert len(ax.support) == 5

    def test_matches_gt_axis_on_rendered_chart(self):
        checked = 0
        for seed in range(8):
            _, gt = render_chart("vbar", seed)
            ocr = simulate_ocr(gt, CLEAN, seed)
            ax = recover_axis(ocr, "y")
            if ax is None:  # some styles hide the value axis entirely
                assert sum(t.role == "tick_y" for t in gt.text_boxes) < 2
                continue
            checked += 1
            for px in (150.0, 300.0):
                want = gt.y_axis.value_at(px)
                span = abs(gt.y_axis.slope) * 512
                assert abs(ax.value_at(px) - want) <= 0.01 * span
        assert checked >= 3


class TestAxisModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            AxisModel("y", 0.0, 1.0, ((0.0, 0.0), (1.0, 1.0)))
        with pytest.raises(ValueError):
            AxisModel("y", 1.0, 0.0, ((0.0, 0.0),))

    def test_round_trip_mapping(self):
        ax = AxisModel("x", 2.0, -10.0, ((0.0, -10.0), (5.0, 0.0)))
        assert ax.pixel_at(ax.value_at(33.0)) == pytest.approx(33.0)
