"""Metrics against independent oracles: edit distance, value accuracy,
detection AP, and report invariants."""

import itertools
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from charter.geometry import BBox
from charter.metrics import (
    AblationReport,
    EvalReport,
    LABEL_MODE_ANY,
    MatchPolicy,
    MatchResult,
    ReportCell,
    VALUE_BAR,
    VALUE_POINT,
    VALUE_SECTOR,
    build_report,
    detection_ap,
    levenshtein_distance,
    levenshtein_ratio,
    normalize_label,
    value_accuracy,
)
from charter.table import ChartTable, Row, Series


# -- reference implementations (independent of the code under test) ----------


def _lev_oracle(s: str, t: str) -> int:
    """Memoized recursive edit distance straight from the recurrence."""

    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1,
                   d(i - 1, j - 1) + (s[i - 1] != t[j - 1]))

    return d(len(s), len(t))


def _ap_oracle(pred, gt, thr=0.5):
    """AP by enumerating every injective pred->gt assignment and keeping the
    score-order-consistent matching the greedy matcher would produce; only
    feasible for tiny box counts."""
    from charter.geometry import iou

    order = sorted(range(len(pred)), key=lambda i: (-pred[i].score, i))
    taken = [False] * len(gt)
    tps = []
    for i in order:
        cands = [(iou(pred[i], g), j) for j, g in enumerate(gt)
                 if not taken[j] and iou(pred[i], g) >= thr]
        if cands:
            _, j = max(cands)
            taken[j] = True
            tps.append(1)
        else:
            tps.append(0)
    if not gt:
        return 1.0 if not pred else 0.0
    if not pred:
        return 0.0
    # all-point interpolation over the PR curve
    ap, prev_r, tp, fp = 0.0, 0.0, 0, 0
    precisions, recalls = [], []
    for t in tps:
        tp += t
        fp += 1 - t
        precisions.append(tp / (tp + fp))
        recalls.append(tp / len(gt))
    for k in range(len(tps)):
        ap += (recalls[k] - prev_r) * max(precisions[k:])
        prev_r = recalls[k]
    return ap


def _bars(values, labels=None):
    labels = labels or [f"b{i}" for i in range(len(values))]
    return ChartTable("vbar", rows=tuple(Row(l, v) for l, v in zip(labels, values)))


class TestNormalizeLabel:
    def test_collapses_and_casefolds(self):
        assert normalize_label("  Total \t Sales ") == "total sales"

    def test_empty(self):
        assert normalize_label("   ") == ""


class TestLevenshtein:
    @pytest.mark.parametrize("s,t,d", [
        ("", "", 0), ("a", "", 1), ("kitten", "sitting", 3),
        ("flaw", "lawn", 2), ("abc", "abc", 0),
    ])
    def test_known_distances(self, s, t, d):
        assert levenshtein_distance(s, t) == d

    def test_exhaustive_short_binary_strings(self):
        # [DERIVED] every pair over {a,b} up to length 4 against the oracle
        strings = [""] + ["".join(p) for n in range(1, 5)
                          for p in itertools.product("ab", repeat=n)]
        for s in strings:
            for t in strings:
                assert levenshtein_distance(s, t) == _lev_oracle(s, t)

    @settings(max_examples=300, deadline=None)
    @given(st.text(alphabet="ab", max_size=12), st.text(alphabet="ab", max_size=12))
    def test_matches_oracle_binary_alphabet(self, s, t):
        assert levenshtein_distance(s, t) == _lev_oracle(s, t)

    @given(st.text(max_size=10), st.text(max_size=10))
    def test_ratio_bounds_and_symmetry(self, s, t):
        r = levenshtein_ratio(s, t, normalize=False)
        assert 0.0 <= r <= 1.0
        assert r == levenshtein_ratio(t, s, normalize=False)

    def test_ratio_formula(self):
        # (|s| + |t| - d) / (|s| + |t|) = (6 + 7 - 3) / 13
        assert levenshtein_ratio("kitten", "sitting") == pytest.approx(10 / 13)

    def test_ratio_one_iff_equal_after_normalize(self):
        assert levenshtein_ratio("Total  Sales", "total sales") == 1.0
        assert levenshtein_ratio("a", "b") < 1.0

    def test_both_empty(self):
        assert levenshtein_ratio("", "") == 1.0


class TestMatchPolicy:
    def test_validation(self):
        with pytest.raises(ValueError):
            MatchPolicy(tau=1.5)
        with pytest.raises(ValueError):
            MatchPolicy(epsilon=0.0)
        with pytest.raises(ValueError):
            MatchPolicy(label_mode="fuzzy")
        with pytest.raises(ValueError):
            MatchPolicy(value_kind="area")


class TestValueAccuracy:
    def test_exact_match(self):
        res = value_accuracy(_bars([10.0, 20.0]), _bars([10.0, 20.0]), MatchPolicy())
        assert res.accuracy == 1.0 and res.value_tp == 2

    def test_epsilon_is_relative(self):
        # 10.05 vs 10 is 0.5% off: inside eps=0.01, outside eps=0.001
        pred = _bars([10.05])
        gt = _bars([10.0])
        assert value_accuracy(pred, gt, MatchPolicy(epsilon=0.01)).accuracy == 1.0
        assert value_accuracy(pred, gt, MatchPolicy(epsilon=0.001)).accuracy == 0.0

    def test_zero_gt_fallback_uses_value_scale(self):
        gt = _bars([0.0, 100.0])
        assert value_accuracy(_bars([0.5, 100.0]), gt, MatchPolicy(epsilon=0.01)).accuracy == 1.0
        assert value_accuracy(_bars([2.0, 100.0]), gt, MatchPolicy(epsilon=0.01)).accuracy == 0.5

    def test_tau_gates_label_matches(self):
        pred = _bars([10.0], labels=["catz"])
        gt = _bars([10.0], labels=["cats"])
        assert value_accuracy(pred, gt, MatchPolicy(tau=1.0)).accuracy == 0.0
        assert value_accuracy(pred, gt, MatchPolicy(tau=0.7)).accuracy == 1.0

    def test_any_mode_matches_by_position(self):
        pred = _bars([10.0, 20.0], labels=["x", "y"])
        gt = _bars([10.0, 20.0], labels=["cats", "dogs"])
        pol = MatchPolicy(tau=1.0, label_mode=LABEL_MODE_ANY)
        assert value_accuracy(pred, gt, pol).accuracy == 1.0

    def test_greedy_prefers_best_label(self):
        gt = _bars([1.0, 2.0], labels=["alpha", "beta"])
        pred = _bars([2.0, 1.0], labels=["beta", "alpha"])
        res = value_accuracy(pred, gt, MatchPolicy(tau=1.0))
        assert res.accuracy == 1.0

    def test_chart_type_mismatch(self):
        with pytest.raises(ValueError):
            value_accuracy(ChartTable("pie"), ChartTable("vbar"), MatchPolicy())

    def test_sector_zero_scale_is_360(self):
        gt = ChartTable("pie", rows=(Row("a", 0.6), Row("b", 0.4)))
        pred = ChartTable("pie", rows=(Row("a", 0.62), Row("b", 0.38)))
        pol = MatchPolicy(epsilon=0.05, value_kind=VALUE_SECTOR)
        res = value_accuracy(pred, gt, pol)
        # 0.62*360 vs 0.6*360: 3.3% relative error, within eps=0.05;
        # 0.38 vs 0.40 is 5% exactly
        assert res.accuracy == 1.0

    def test_point_accuracy(self):
        gt = ChartTable("line", series=(Series("s", ((0.0, 0.0), (10.0, 5.0))),))
        good = ChartTable("line", series=(Series("s", ((0.05, 0.01), (10.0, 5.0))),))
        bad = ChartTable("line", series=(Series("s", ((3.0, 0.0), (10.0, 5.0))),))
        pol = MatchPolicy(epsilon=0.01, value_kind=VALUE_POINT)
        assert value_accuracy(good, gt, pol).accuracy == 1.0
        assert value_accuracy(bad, gt, pol).accuracy == 0.5

    def test_monotone_in_epsilon_and_tau(self, rng):
        # [DERIVED] accuracy can only grow as eps loosens, and can only
        # shrink as tau tightens
        for _ in range(25):
            n = int(rng.integers(1, 6))
            gt_vals = rng.uniform(1.0, 100.0, size=n)
            pred_vals = gt_vals * (1.0 + rng.normal(0, 0.05, size=n))
            labels = [f"l{i}" for i in range(n)]
            noisy = [l + ("x" if rng.random() < 0.5 else "") for l in labels]
            gt = _bars(list(gt_vals), labels)
            pred = _bars(list(pred_vals), noisy)
            eps_accs = [value_accuracy(pred, gt, MatchPolicy(epsilon=e, tau=0.0)).accuracy
                        for e in (0.001, 0.01, 0.05, 0.2)]
            assert eps_accs == sorted(eps_accs)
            tau_accs = [value_accuracy(pred, gt, MatchPolicy(epsilon=0.05, tau=t)).accuracy
                        for t in (1.0, 0.8, 0.4, 0.0)]
            assert tau_accs == sorted(tau_accs)


class TestDetectionAp:
    def _box(self, x, score=1.0):
        return BBox(x, 0, x + 10, 10, category="c", score=score)

    def test_perfect(self):
        gts = [self._box(0), self._box(20)]
        assert detection_ap(gts, gts) == 1.0

    def test_half_derivation(self):
        # [DERIVED] one TP then one FP: PR = (1, 0.5), (0.5, 0.5) -> AP = 0.5
        gt = [self._box(0), self._box(20)]
        pred = [self._box(0, 0.9), self._box(50, 0.8)]
        assert detection_ap(pred, gt) == 0.5

    def test_empty_cases(self):
        assert detection_ap([], []) == 1.0
        assert detection_ap([self._box(0)], []) == 0.0
        assert detection_ap([], [self._box(0)]) == 0.0

    def test_matches_enumeration_oracle(self, rng):
        for _ in range(200):
            n_gt = int(rng.integers(0, 5))
            n_pred = int(rng.integers(0, 5))
            gt = [self._box(float(rng.uniform(0, 60))) for _ in range(n_gt)]
            pred = [self._box(float(rng.uniform(0, 60)), float(rng.uniform(0.1, 1.0)))
                    for _ in range(n_pred)]
            assert detection_ap(pred, gt) == pytest.approx(_ap_oracle(pred, gt))


class TestReports:
    def _report(self):
        gt = _bars([10.0, 20.0])
        pred = _bars([10.0, 21.0])
        return build_report("bars", [(pred, gt), (None, gt)],
                            epsilons=(0.01, 0.1), taus=(1.0, 0.0), value_kind=VALUE_BAR)

    def test_grid_and_counts(self):
        rep = self._report()
        assert rep.epsilons == (0.01, 0.1)
        assert rep.taus == (1.0, 0.0)
        assert rep.chart_count == 2 and rep.failure_count == 1
        c = rep.cell(0.01, 1.0)
        # the failed chart's 2 rows count only in the denominator
        assert c.gt_count == 4 and c.value_tp == 1
        assert c.accuracy == pytest.approx(0.25)
        assert rep.cell(0.1, 1.0).value_tp == 2

    def test_cell_lookup_missing(self):
        with pytest.raises(KeyError):
            self._report().cell(0.5, 0.5)

    def test_json_round_trip(self):
        rep = self._report()
        back = EvalReport.from_dict(__import__("json").loads(rep.to_json()))
        assert back == rep

    def test_csv_and_markdown_render(self):
        rep = self._report()
        csv = rep.to_csv()
        assert csv.splitlines()[0] == "tau,eps=0.01,eps=0.1"
        assert len(csv.splitlines()) == 3
        md = rep.to_markdown()
        assert "| tau |" in md and "0.2500" in md

    def test_cell_invariants(self):
        with pytest.raises(ValueError):
            ReportCell(0.01, 1.0, 1.5, 1, 1, 1)
        with pytest.raises(ValueError):
            ReportCell(0.01, 1.0, 0.5, 1, 1, 2)
        with pytest.raises(ValueError):
            MatchResult(0.5, 2, 1, 2)

    def test_ablation_render(self):
        rep = self._report()
        ab = AblationReport(rep, rep)
        assert "heatmaps" in ab.to_csv()
        assert "boxes" in ab.to_markdown()
        assert set(ab.to_dict()) == {"heatmaps", "boxes"}
