"""Evaluation metrics: Levenshtein label similarity, ε relative-error value
accuracy, detection AP, and the boxes-vs-heatmaps pie ablation report."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .geometry import BBox, iou
from .table import ChartTable

# Thresholds the ablation report sweeps, loosest last.
ABLATION_TAUS = (1.0, 0.8, 0.4, 0.0)

LABEL_MODE_ANY = "any"
LABEL_MODE_R_LEV = "r_lev"

VALUE_BAR = "bar_value"
VALUE_SECTOR = "sector_angle"
VALUE_POINT = "point_pair"


# -- label similarity -------------------------------------------------------


def normalize_label(s: str) -> str:
    """Canonical form used before any label comparison: trimmed, internal
    whitespace runs collapsed, case-insensitive."""
    return " ".join(s.split()).casefold()


def levenshtein_distance(s: str, t: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if s == t:
        return 0
    if not s:
        return len(t)
    if not t:
        return len(s)
    prev = np.arange(len(t) + 1)
    for i, cs in enumerate(s, start=1):
        cur = np.empty(len(t) + 1, dtype=np.int64)
        cur[0] = i
        for j, ct in enumerate(t, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (cs != ct))
        prev = cur
    return int(prev[-1])


def levenshtein_ratio(s: str, t: str, normalize: bool = True) -> float:
    """R_Lev(s, t) = (|s| + |t| - L_dist(s, t)) / (|s| + |t|); 1.0 iff the
    (normalized) strings are equal, and two empty strings score 1.0."""
    if normalize:
        s, t = normalize_label(s), normalize_label(t)
    total = len(s) + len(t)
    if total == 0:
        return 1.0
    return (total - levenshtein_distance(s, t)) / total


# -- matching policy --------------------------------------------------------


@dataclass(frozen=True)
class MatchPolicy:
    """How predicted elements are paired with ground truth and when a value
    counts as recovered."""

    epsilon: float = 0.01
    tau: float = 1.0  # minimum R_Lev for a label match (r_lev mode)
    label_mode: str = LABEL_MODE_R_LEV
    value_kind: str = VALUE_BAR

    def __post_init__(self):
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.label_mode not in (LABEL_MODE_ANY, LABEL_MODE_R_LEV):
            raise ValueError(f"unknown label_mode {self.label_mode!r}")
        if self.value_kind not in (VALUE_BAR, VALUE_SECTOR, VALUE_POINT):
            raise ValueError(f"unknown value_kind {self.value_kind!r}")


@dataclass(frozen=True)
class MatchedPair:
    gt_label: str
    pred_label: str
    gt_value: float | tuple[float, float]
    pred_value: float | tuple[float, float]
    r_lev: float
    value_ok: bool


@dataclass(frozen=True)
class MatchResult:
    accuracy: float
    gt_count: int
    matched: int
    value_tp: int
    pairs: tuple[MatchedPair, ...] = ()

    def __post_init__(self):
        if not (self.value_tp <= self.matched <= self.gt_count or self.gt_count == 0):
            raise ValueError("expected value_tp <= matched <= gt_count")


def _value_within(gt_v: float, pred_v: float, eps: float, zero_scale: float) -> bool:
    """ε relative-error test, with an absolute fallback against the table's
    value scale when the ground-truth value is exactly zero."""
    if gt_v == 0.0:
        return abs(pred_v) <= eps * zero_scale
    return abs((gt_v - pred_v) / gt_v) <= eps


def _greedy_label_matches(gt_labels: list[str], pred_labels: list[str],
                          policy: MatchPolicy) -> list[tuple[int, int, float]]:
    """(gt index, pred index, R_Lev) pairs. `any` mode pairs by position;
    `r_lev` mode greedily takes the highest-similarity pairs at or above τ,
    ties broken by positional order (deterministic)."""
    if policy.label_mode == LABEL_MODE_ANY:
        return [(i, i, levenshtein_ratio(g, p))
                for i, (g, p) in enumerate(zip(gt_labels, pred_labels))]
    scored = [(levenshtein_ratio(g, p), i, j)
              for i, g in enumerate(gt_labels)
              for j, p in enumerate(pred_labels)]
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_gt: set[int] = set()
    used_pred: set[int] = set()
    out: list[tuple[int, int, float]] = []
    for r, i, j in scored:
        if r < policy.tau or i in used_gt or j in used_pred:
            continue
        used_gt.add(i)
        used_pred.add(j)
        out.append((i, j, r))
    out.sort()
    return out


def value_accuracy(pred: ChartTable, gt: ChartTable, policy: MatchPolicy) -> MatchResult:
    """Fraction of ground-truth elements whose value is recovered within ε
    under the policy's label-matching regime."""
    if pred.chart_type != gt.chart_type:
        raise ValueError(
            f"chart type mismatch: pred {pred.chart_type!r} vs gt {gt.chart_type!r}")
    if policy.value_kind == VALUE_POINT:
        return _point_accuracy(pred, gt, policy)
    return _row_accuracy(pred, gt, policy)


def _row_accuracy(pred: ChartTable, gt: ChartTable, policy: MatchPolicy) -> MatchResult:
    gt_rows = list(gt.rows)
    pred_rows = list(pred.rows)
    n = len(gt_rows)
    if n == 0:
        return MatchResult(1.0 if not pred_rows else 0.0, 0, 0, 0)
    if policy.value_kind == VALUE_SECTOR:
        # sector fractions compared as angles; the 360 factor cancels in the
        # relative error, but keeps the zero-fallback scale meaningful
        gt_vals = [r.value * 360.0 for r in gt_rows]
        pred_vals = [r.value * 360.0 for r in pred_rows]
        zero_scale = 360.0
    else:
        gt_vals = [r.value for r in gt_rows]
        pred_vals = [r.value for r in pred_rows]
        zero_scale = max((abs(v) for v in gt_vals), default=1.0) or 1.0

    matches = _greedy_label_matches([r.label for r in gt_rows],
                                    [r.label for r in pred_rows], policy)
    matches = [(i, j, r) for i, j, r in matches if j < len(pred_rows) and i < n]
    pairs: list[MatchedPair] = []
    tp = 0
    for i, j, r in matches:
        ok = _value_within(gt_vals[i], pred_vals[j], policy.epsilon, zero_scale)
        tp += int(ok)
        pairs.append(MatchedPair(gt_rows[i].label, pred_rows[j].label,
                                 gt_vals[i], pred_vals[j], r, ok))
    return MatchResult(tp / n, n, len(matches), tp, tuple(pairs))


def _point_accuracy(pred: ChartTable, gt: ChartTable, policy: MatchPolicy) -> MatchResult:
    gt_series = list(gt.series)
    pred_series = list(pred.series)
    total = sum(len(s.points) for s in gt_series)
    if total == 0:
        return MatchResult(1.0 if not pred_series else 0.0, 0, 0, 0)
    all_x = [x for s in gt_series for x, _ in s.points]
    all_y = [y for s in gt_series for _, y in s.points]
    x_tol = policy.epsilon * (max(all_x) - min(all_x) or 1.0)
    y_tol = policy.epsilon * (max(all_y) - min(all_y) or 1.0)

    matches = _greedy_label_matches([s.label for s in gt_series],
                                    [s.label for s in pred_series], policy)
    pairs: list[MatchedPair] = []
    matched_pts = 0
    tp = 0
    for i, j, r in matches:
        if j >= len(pred_series):
            continue
        used = [False] * len(pred_series[j].points)
        for gx, gy in gt_series[i].points:
            best = None
            for k, (px, py) in enumerate(pred_series[j].points):
                if used[k] or abs(px - gx) > x_tol or abs(py - gy) > y_tol:
                    continue
                d = math.hypot(px - gx, py - gy)
                if best is None or d < best[0]:
                    best = (d, k)
            matched_pts += 1
            if best is not None:
                used[best[1]] = True
                tp += 1
                px, py = pred_series[j].points[best[1]]
                pairs.append(MatchedPair(gt_series[i].label, pred_series[j].label,
                                         (gx, gy), (px, py), r, True))
            else:
                pairs.append(MatchedPair(gt_series[i].label, pred_series[j].label,
                                         (gx, gy), (math.nan, math.nan), r, False))
    return MatchResult(tp / total, total, matched_pts, tp, tuple(pairs))


# -- detection AP -----------------------------------------------------------


def detection_ap(pred: list[BBox], gt: list[BBox], iou_threshold: float = 0.5) -> float:
    """Single-class average precision: score-sorted greedy matching at
    IoU >= threshold, all-point precision-recall interpolation."""
    if not gt:
        return 1.0 if not pred else 0.0
    if not pred:
        return 0.0
    order = sorted(range(len(pred)), key=lambda i: (-pred[i].score, i))
    taken = [False] * len(gt)
    tps: list[bool] = []
    for i in order:
        best = None
        for j, g in enumerate(gt):
            if taken[j]:
                continue
            v = iou(pred[i], g)
            if v >= iou_threshold and (best is None or v > best[0]):
                best = (v, j)
        if best is not None:
            taken[best[1]] = True
            tps.append(True)
        else:
            tps.append(False)
    tp_cum = np.cumsum(tps)
    fp_cum = np.cumsum([not t for t in tps])
    recall = tp_cum / len(gt)
    precision = tp_cum / (tp_cum + fp_cum)
    # all-point interpolation: integrate the running-max precision envelope
    ap = 0.0
    prev_r = 0.0
    for k in range(len(recall)):
        env = float(precision[k:].max())
        ap += (float(recall[k]) - prev_r) * env
        prev_r = float(recall[k])
    return ap


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class ReportCell:
    epsilon: float
    tau: float
    accuracy: float
    gt_count: int
    matched: int
    value_tp: int

    def __post_init__(self):
        if not (0.0 <= self.accuracy <= 1.0):
            raise ValueError("accuracy must be in [0, 1]")
        if not (self.value_tp <= self.matched <= self.gt_count or self.gt_count == 0):
            raise ValueError("expected value_tp <= matched <= gt_count")


@dataclass(frozen=True)
class EvalReport:
    name: str
    value_kind: str
    cells: tuple[ReportCell, ...]
    chart_count: int = 0
    failure_count: int = 0
    runtime_s: float = 0.0

    def cell(self, epsilon: float, tau: float) -> ReportCell:
        for c in self.cells:
            if c.epsilon == epsilon and c.tau == tau:
                return c
        raise KeyError(f"no cell for epsilon={epsilon}, tau={tau}")

    @property
    def epsilons(self) -> tuple[float, ...]:
        return tuple(sorted({c.epsilon for c in self.cells}))

    @property
    def taus(self) -> tuple[float, ...]:
        return tuple(sorted({c.tau for c in self.cells}, reverse=True))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value_kind": self.value_kind,
            "chart_count": self.chart_count,
            "failure_count": self.failure_count,
            "runtime_s": self.runtime_s,
            "cells": [c.__dict__ for c in self.cells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            name=d["name"],
            value_kind=d["value_kind"],
            cells=tuple(ReportCell(**c) for c in d["cells"]),
            chart_count=d.get("chart_count", 0),
            failure_count=d.get("failure_count", 0),
            runtime_s=d.get("runtime_s", 0.0),
        )

    def to_csv(self) -> str:
        lines = ["tau," + ",".join(f"eps={e:g}" for e in self.epsilons)]
        for tau in self.taus:
            row = [f"{tau:g}"]
            for e in self.epsilons:
                row.append(f"{self.cell(e, tau).accuracy:.4f}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        head = "| tau | " + " | ".join(f"eps={e:g}" for e in self.epsilons) + " |"
        sep = "|" + "---|" * (len(self.epsilons) + 1)
        lines = [f"### {self.name}", "", head, sep]
        for tau in self.taus:
            cells = " | ".join(f"{self.cell(e, tau).accuracy:.4f}" for e in self.epsilons)
            lines.append(f"| {tau:g} | {cells} |")
        return "\n".join(lines) + "\n"


def build_report(
    name: str,
    tables: list[tuple[ChartTable | None, ChartTable]],
    epsilons: tuple[float, ...],
    taus: tuple[float, ...],
    value_kind: str,
    runtime_s: float = 0.0,
) -> EvalReport:
    """Aggregate value_accuracy over (prediction, ground truth) pairs into a
    per-(ε, τ) grid. A None prediction (failed chart) contributes its GT
    elements to the denominator only."""
    cells: list[ReportCell] = []
    failures = sum(1 for p, _ in tables if p is None)
    for eps in epsilons:
        for tau in taus:
            policy = MatchPolicy(epsilon=eps, tau=tau, value_kind=value_kind)
            gt_n = matched = tp = 0
            for pred, gt in tables:
                if value_kind == VALUE_POINT:
                    count = sum(len(s.points) for s in gt.series)
                else:
                    count = len(gt.rows)
                gt_n += count
                if pred is None or pred.chart_type != gt.chart_type:
                    continue
                res = value_accuracy(pred, gt, policy)
                matched += res.matched
                tp += res.value_tp
            acc = tp / gt_n if gt_n else 1.0
            cells.append(ReportCell(eps, tau, acc, gt_n, matched, tp))
    return EvalReport(name, value_kind, tuple(cells),
                      chart_count=len(tables), failure_count=failures,
                      runtime_s=runtime_s)


@dataclass(frozen=True)
class AblationReport:
    """Heatmap-path vs box-path sector extraction over the same oracle
    outputs; one accuracy grid per path."""

    heatmaps: EvalReport
    boxes: EvalReport

    def to_dict(self) -> dict:
        return {"heatmaps": self.heatmaps.to_dict(), "boxes": self.boxes.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        eps = self.heatmaps.epsilons
        lines = ["path,tau," + ",".join(f"eps={e:g}" for e in eps)]
        for name, rep in (("heatmaps", self.heatmaps), ("boxes", self.boxes)):
            for tau in rep.taus:
                row = [name, f"{tau:g}"]
                row += [f"{rep.cell(e, tau).accuracy:.4f}" for e in eps]
                lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        eps = self.heatmaps.epsilons
        lines = ["### Pie sector ablation: heatmaps vs boxes", ""]
        for e in eps:
            lines.append(f"ε = {e:g}")
            lines.append("")
            lines.append("| tau | heatmaps | boxes |")
            lines.append("|---|---|---|")
            for tau in self.heatmaps.taus:
                hm = self.heatmaps.cell(e, tau).accuracy
                bx = self.boxes.cell(e, tau).accuracy
                lines.append(f"| {tau:g} | {hm:.4f} | {bx:.4f} |")
            lines.append("")
        return "\n".join(lines)


def ablation_report(
    charts,
    epsilons: tuple[float, ...] = (0.05,),
    taus: tuple[float, ...] = ABLATION_TAUS,
    config=None,
) -> AblationReport:
    """Run the heatmap path and the box-only path over identical oracle
    outputs. `charts` is a sequence of (gt_table, detector_output, ocr_output,
    raster) tuples for pie charts."""
    from .analysis import ChartAnalysisError, analyze, analyze_pie_boxes
    from .analysis.config import DEFAULT_ANALYSIS_CONFIG

    cfg = config or DEFAULT_ANALYSIS_CONFIG
    charts = list(charts)
    if not charts:
        raise ValueError("ablation requires a non-empty pie dataset")
    heat_tables: list[tuple[ChartTable | None, ChartTable]] = []
    box_tables: list[tuple[ChartTable | None, ChartTable]] = []
    t0 = time.perf_counter()
    for gt_table, det, ocr, raster in charts:
        try:
            heat = analyze(det, ocr, raster, cfg)
        except ChartAnalysisError:
            heat = None
        try:
            box = analyze_pie_boxes(det, ocr, raster, cfg)
        except ChartAnalysisError:
            box = None
        heat_tables.append((heat, gt_table))
        box_tables.append((box, gt_table))
    dt = time.perf_counter() - t0
    return AblationReport(
        build_report("heatmaps", heat_tables, tuple(epsilons), tuple(taus),
                     VALUE_SECTOR, runtime_s=dt),
        build_report("boxes", box_tables, tuple(epsilons), tuple(taus),
                     VALUE_SECTOR, runtime_s=dt),
    )
