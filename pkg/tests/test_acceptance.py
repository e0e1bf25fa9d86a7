"""Acceptance gate: end-to-end guarantees on seeded synthetic batches.

Each test pins one release criterion at its stated tolerance; none of them
may be weakened without revisiting the release bar.
"""

import itertools
import json
import math
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from charter.analysis import (
    ChartAnalysisError,
    analyze,
    extract_sectors,
    fit_pies,
    recover_axis,
)
from charter.analysis.pies import PieGeometry
from charter.categories import (
    HM_PIE_CENTER,
    HM_PIE_CIRCUMFERENCE,
    HM_PIE_RADIAL,
    HM_PIE_SECTOR_CORNER,
)
from charter.cli import EXIT_OK, main as cli_main
from charter.geometry import BBox, Point, iou
from charter.metrics import (
    MatchPolicy,
    VALUE_BAR,
    VALUE_SECTOR,
    ablation_report,
    build_report,
    detection_ap,
    levenshtein_distance,
    levenshtein_ratio,
    value_accuracy,
)
from charter.oracle import (
    NoiseConfig,
    parse_numeric_token,
    simulate_detector,
    simulate_ocr,
)
from charter.raster import Heatmap
from charter.synth import SynthConfig
from charter.synth.gt import ROLE_DECOY
from charter.table import ChartTable, Row

from conftest import CLEAN, render_chart

ALL_TYPES = ("vbar", "hbar", "pie", "line", "scatter")


def _oracle(chart_type, seed, noise=CLEAN, config=None):
    if config is None:
        raster, gt = render_chart(chart_type, seed)
    else:
        raster, gt = render_chart(chart_type, seed, config)
    det = simulate_detector(gt, noise, seed)
    ocr = simulate_ocr(gt, noise, seed)
    return gt, det, ocr, raster


def _point_hits(gt, table, frac=0.01):
    """(hits, total) of GT points with a prediction within `frac` of the
    axis value range on each axis."""
    got = [p for s in table.series for p in s.points] if table is not None else []
    tol_x = frac * abs(gt.x_axis.slope) * gt.plot_rect.width
    tol_y = frac * abs(gt.y_axis.slope) * gt.plot_rect.height
    total = hits = 0
    for s in gt.table.series:
        for wx, wy in s.points:
            total += 1
            hits += any(abs(gx - wx) <= tol_x and abs(gy - wy) <= tol_y
                        for gx, gy in got)
    return hits, total


class TestCriterion1ZeroNoiseRoundTrip:
    def test_round_trip_200_per_type(self):
        # 200 charts per type (seeds 0-199), clean oracle:
        # bar/pie value accuracy >= 0.99 at eps=0.01, tau=1.0;
        # line/scatter points within 1% of the axis range for >= 0.98;
        # under 60 s end to end
        t0 = time.perf_counter()
        row_tables = {"vbar": [], "hbar": [], "pie": []}
        pt_hits = {"line": [0, 0], "scatter": [0, 0]}
        for chart_type in ALL_TYPES:
            for seed in range(200):
                gt, det, ocr, raster = _oracle(chart_type, seed)
                try:
                    table = analyze(det, ocr, raster)
                except ChartAnalysisError:
                    table = None
                if chart_type in row_tables:
                    row_tables[chart_type].append((table, gt.table))
                else:
                    h, n = _point_hits(gt, table)
                    pt_hits[chart_type][0] += h
                    pt_hits[chart_type][1] += n
        elapsed = time.perf_counter() - t0

        for chart_type, tables in row_tables.items():
            kind = VALUE_SECTOR if chart_type == "pie" else VALUE_BAR
            rep = build_report(chart_type, tables, (0.01,), (1.0,), kind)
            assert rep.cell(0.01, 1.0).accuracy >= 0.99, chart_type
        for chart_type, (h, n) in pt_hits.items():
            assert h / n >= 0.98, chart_type
        assert elapsed < 60.0


def _gauss_pie_heatmaps(cx, cy, r, boundaries=(), res=128, sigma=2.0):
    ys, xs = np.mgrid[0:res, 0:res].astype(np.float64)
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    out = {
        HM_PIE_CENTER: np.exp(-d**2 / (2 * sigma**2)),
        HM_PIE_CIRCUMFERENCE: np.exp(-((d - r) ** 2) / (2 * sigma**2)),
        HM_PIE_RADIAL: np.zeros_like(d),
        HM_PIE_SECTOR_CORNER: np.zeros_like(d),
    }
    for ang in boundaries:
        th = math.radians(ang)
        tx, ty = cx + r * math.cos(th), cy + r * math.sin(th)
        t = np.clip(((xs - cx) * (tx - cx) + (ys - cy) * (ty - cy)) / (r * r), 0, 1)
        d2 = (xs - (cx + t * (tx - cx))) ** 2 + (ys - (cy + t * (ty - cy))) ** 2
        np.maximum(out[HM_PIE_RADIAL], np.exp(-d2 / (2 * sigma**2)),
                   out=out[HM_PIE_RADIAL])
        d2c = (xs - tx) ** 2 + (ys - ty) ** 2
        np.maximum(out[HM_PIE_SECTOR_CORNER], np.exp(-d2c / (2 * sigma**2)),
                   out=out[HM_PIE_SECTOR_CORNER])
    return {cat: Heatmap(v, cat) for cat, v in out.items()}


class TestCriterion2PieVotingPrecision:
    def test_500_synthetic_circles(self):
        # radius and center error <= 1 px in >= 99% of 500 random cases;
        # sector spans always sum to 360 +/- 0.5 degrees
        rng = np.random.default_rng(202)
        good = 0
        for _ in range(500):
            cx = float(rng.uniform(38, 90))
            cy = float(rng.uniform(38, 90))
            r = float(rng.uniform(12, 36))
            n = int(rng.integers(2, 7))
            while True:
                bounds = np.sort(rng.uniform(0, 360, size=n))
                gaps = np.diff(np.concatenate([bounds, [bounds[0] + 360.0]]))
                if gaps.min() >= 12.0:
                    break
            hms = _gauss_pie_heatmaps(cx, cy, r, tuple(bounds))
            pies = fit_pies(hms)
            if len(pies) == 1:
                g = pies[0]
                if (math.hypot(g.center.x - cx, g.center.y - cy) <= 1.0
                        and abs(g.radius - r) <= 1.0):
                    good += 1
            geom = PieGeometry(Point(cx, cy), r)
            sectors = extract_sectors(geom, hms[HM_PIE_RADIAL],
                                      hms[HM_PIE_SECTOR_CORNER])
            assert abs(sum(s.span for s in sectors) - 360.0) <= 0.5
        assert good / 500 >= 0.99


class TestCriterion3AblationDirection:
    def test_heatmap_path_dominates_box_path(self):
        # [PAPER] on mild-noise pies the heatmap path's sector-angle accuracy
        # at eps=0.05 is >= the box path's at every tau in {1.0, 0.8, 0.4, 0.0}
        mild = NoiseConfig.preset("mild")
        charts = []
        for seed in range(200):
            gt, det, ocr, raster = _oracle("pie", seed, mild)
            charts.append((gt.table, det, ocr, raster))
        report = ablation_report(charts, epsilons=(0.05,), taus=(1.0, 0.8, 0.4, 0.0))
        for tau in (1.0, 0.8, 0.4, 0.0):
            hm = report.heatmaps.cell(0.05, tau).accuracy
            bx = report.boxes.cell(0.05, tau).accuracy
            assert hm >= bx, f"tau={tau}: heatmaps {hm} < boxes {bx}"
        # the report carries both paths over the same tau sweep
        assert report.heatmaps.taus == report.boxes.taus == (1.0, 0.8, 0.4, 0.0)


def _lev_oracle(s: str, t: str) -> int:
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0 or j == 0:
            return i + j
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1,
                   d(i - 1, j - 1) + (s[i - 1] != t[j - 1]))

    return d(len(s), len(t))


def _ap_oracle(pred, gt, thr=0.5):
    """AP from first principles: score-ordered predictions, each matched by
    enumerating every unmatched GT box and taking the best admissible IoU;
    the PR envelope integrated numerically."""
    if not gt:
        return 1.0 if not pred else 0.0
    if not pred:
        return 0.0
    order = sorted(range(len(pred)), key=lambda i: (-pred[i].score, i))
    taken = set()
    flags = []
    for i in order:
        cands = [(iou(pred[i], g), j) for j, g in enumerate(gt)
                 if j not in taken and iou(pred[i], g) >= thr]
        if cands:
            taken.add(max(cands)[1])
            flags.append(1)
        else:
            flags.append(0)
    tp = np.cumsum(flags)
    prec = tp / np.arange(1, len(flags) + 1)
    rec = tp / len(gt)
    env = np.maximum.accumulate(prec[::-1])[::-1]
    return float(np.sum(np.diff(np.concatenate([[0.0], rec])) * env))


class TestCriterion4MetricCorrectness:
    def test_levenshtein_exhaustive_binary_alphabet(self):
        # [DERIVED] exhaustive over all {a,b} string pairs up to length 5,
        # plus dense random coverage of the remaining lengths up to 12
        short = [""] + ["".join(p) for n in range(1, 6)
                        for p in itertools.product("ab", repeat=n)]
        for s in short:
            for t in short:
                d = _lev_oracle(s, t)
                assert levenshtein_distance(s, t) == d
                total = len(s) + len(t)
                want = 1.0 if total == 0 else (total - d) / total
                assert levenshtein_ratio(s, t, normalize=False) == want
        rng = np.random.default_rng(4)
        for _ in range(2000):
            s = "".join(rng.choice(list("ab"), size=rng.integers(0, 13)))
            t = "".join(rng.choice(list("ab"), size=rng.integers(0, 13)))
            assert levenshtein_distance(s, t) == _lev_oracle(s, t)

    def test_value_accuracy_monotone_on_1000_pairs(self):
        rng = np.random.default_rng(44)
        for _ in range(1000):
            n = int(rng.integers(1, 7))
            gt_vals = rng.uniform(0.5, 100.0, size=n)
            pred_vals = gt_vals * (1.0 + rng.normal(0.0, 0.08, size=n))
            labels = [f"l{i}" for i in range(n)]
            pred_labels = [l + "x" * int(rng.integers(0, 3)) for l in labels]
            gt = ChartTable("vbar", rows=tuple(Row(l, v) for l, v in zip(labels, gt_vals)))
            pred = ChartTable("vbar",
                              rows=tuple(Row(l, v) for l, v in zip(pred_labels, pred_vals)))
            accs = [value_accuracy(pred, gt, MatchPolicy(epsilon=e, tau=0.0)).accuracy
                    for e in (0.001, 0.01, 0.05, 0.2, 1.0)]
            assert accs == sorted(accs)
            taus = [value_accuracy(pred, gt, MatchPolicy(epsilon=0.05, tau=t)).accuracy
                    for t in (1.0, 0.8, 0.4, 0.0)]
            assert taus == sorted(taus)

    def test_detection_ap_matches_enumeration(self):
        rng = np.random.default_rng(45)
        for _ in range(500):
            n_gt = int(rng.integers(0, 5))
            n_pred = int(rng.integers(0, 5))
            gt = [BBox(x, 0.0, x + 10.0, 10.0, category="c")
                  for x in rng.uniform(0, 50, size=n_gt)]
            pred = [BBox(x, 0.0, x + 10.0, 10.0, category="c", score=float(s))
                    for x, s in zip(rng.uniform(0, 50, size=n_pred),
                                    rng.uniform(0.05, 1.0, size=n_pred))]
            assert detection_ap(pred, gt) == pytest.approx(_ap_oracle(pred, gt))


class TestCriterion5ExponentParsing:
    def test_100_exponent_tick_charts(self):
        # every chart drawn with an exponent top tick and a baseline-aligned
        # "10 4" decoy pair; the decoy must read as two plain numbers and the
        # recovered value axis must agree with GT within 1%
        cfg = SynthConfig(exponent_ticks_prob=1.0)
        checked = 0
        for chart_type, seeds in (("line", range(50)), ("scatter", range(50))):
            for seed in seeds:
                gt, det, ocr, raster = _oracle(chart_type, seed, config=cfg)
                # decoys: OCR tokens are emitted in GT text-box order
                decoy_idx = [i for i, t in enumerate(gt.text_boxes)
                             if t.role == ROLE_DECOY]
                assert decoy_idx, "exponent charts always carry a decoy pair"
                for i in decoy_idx:
                    tok = ocr.tokens[i]
                    if tok.text == "10":
                        assert parse_numeric_token(tok, ocr.tokens) == 10.0
                ax = recover_axis(ocr, "y", det.heatmaps.get("y_tick"))
                assert ax is not None
                assert abs(ax.slope - gt.y_axis.slope) <= 0.01 * abs(gt.y_axis.slope)
                vrange = abs(gt.y_axis.slope) * gt.plot_rect.height
                scale = max(abs(gt.y_axis.intercept), vrange)
                assert abs(ax.intercept - gt.y_axis.intercept) <= 0.01 * scale
                checked += 1
        assert checked == 100


class TestCriterion6NoiseDegradation:
    def test_monotone_non_increasing_across_presets(self):
        # fixed 200-chart seed set (40 per type); pooled accuracy at eps=0.05
        # may not rise by more than 0.01 from clean to mild to harsh
        presets = [NoiseConfig.preset(n) for n in ("clean", "mild", "harsh")]
        rendered = [(t, s, *render_chart(t, s)[::-1])
                    for t in ALL_TYPES for s in range(40)]  # (type, seed, gt, raster)

        accs = []
        for noise in presets:
            tp = total = 0
            for chart_type, seed, gt, raster in rendered:
                det = simulate_detector(gt, noise, seed)
                ocr = simulate_ocr(gt, noise, seed)
                try:
                    table = analyze(det, ocr, raster)
                except ChartAnalysisError:
                    table = None
                if chart_type in ("line", "scatter"):
                    h, n = _point_hits(gt, table, frac=0.05)
                    tp += h
                    total += n
                else:
                    kind = VALUE_SECTOR if chart_type == "pie" else VALUE_BAR
                    pol = MatchPolicy(epsilon=0.05, tau=0.0, value_kind=kind)
                    total += len(gt.table.rows)
                    if table is not None and table.chart_type == gt.table.chart_type:
                        res = value_accuracy(table, gt.table, pol)
                        tp += res.value_tp
            accs.append(tp / total)

        assert accs[1] <= accs[0] + 0.01, f"clean {accs[0]} -> mild {accs[1]}"
        assert accs[2] <= accs[1] + 0.01, f"mild {accs[1]} -> harsh {accs[2]}"


class TestCriterion7Determinism:
    def test_two_runs_byte_identical(self, tmp_path):
        def run(root: Path) -> dict[str, bytes]:
            ds, pred, rep = root / "ds", root / "pred", root / "report.json"
            assert cli_main(["generate", "--out", str(ds), "--seed", "3",
                             "--count", "2"]) == EXIT_OK
            assert cli_main(["extract", "--dataset", str(ds), "--out", str(pred),
                             "--noise", "mild", "--jobs", "2"]) in (0, 2)
            assert cli_main(["evaluate", "--dataset", str(ds), "--pred", str(pred),
                             "--out", str(rep)]) == EXIT_OK
            return {str(p.relative_to(root)): p.read_bytes()
                    for p in sorted(root.rglob("*"))
                    if p.is_file() and p.name != "run-log.jsonl"}

        a = run(tmp_path / "a")
        b = run(tmp_path / "b")
        assert list(a) == list(b)
        for name in a:
            assert a[name] == b[name], f"{name} differs between runs"
