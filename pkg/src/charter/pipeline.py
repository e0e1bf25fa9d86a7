"""Dataset-level plumbing: generation to disk, oracle simulation, batch
extraction, evaluation, the pie ablation, and debug overlays.

On-disk layout of a dataset directory:

    manifest.json                 ids, seeds, config digest
    <id>.png                      rendered chart
    <id>.gt.json                  ground truth (docs/gt-schema.md)
    <id>.det.json                 simulated detector boxes (extract --noise)
    <id>.hm.<category>.png(+json) simulated heatmaps, 16-bit grayscale
    <id>.ocr.json                 simulated OCR tokens

Prediction directories hold `<id>.table.json` (docs/table-schema.md) plus a
`failures.json` listing per-chart structured errors.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from PIL import Image, ImageDraw

from .analysis import AnalysisConfig, ChartAnalysisError, DEFAULT_ANALYSIS_CONFIG, analyze
from .categories import HEATMAP_CATEGORIES
from .geometry import BBox
from .metrics import (
    ABLATION_TAUS,
    AblationReport,
    EvalReport,
    VALUE_BAR,
    VALUE_POINT,
    VALUE_SECTOR,
    ablation_report,
    build_report,
)
from .oracle import (
    DetectorOutput,
    NoiseConfig,
    OcrOutput,
    OcrToken,
    simulate_detector,
    simulate_ocr,
)
from .raster import Heatmap, Raster
from .synth import DEFAULT_CONFIG, GroundTruth, LayoutOverflow, SynthConfig, render, sample_spec
from .table import ChartTable

MANIFEST_VERSION = 1
CHART_TYPES = ("vbar", "hbar", "pie", "line", "scatter")
# seed offset applied when a sampled layout overflows and must be redrawn
RESAMPLE_STRIDE = 10000

_VALUE_KIND_BY_TYPE = {
    "vbar": VALUE_BAR,
    "hbar": VALUE_BAR,
    "pie": VALUE_SECTOR,
    "line": VALUE_POINT,
    "scatter": VALUE_POINT,
}


# -- noise presets ----------------------------------------------------------


def load_noise_preset(name_or_path: str) -> NoiseConfig:
    """Built-in preset (clean/mild/harsh) or a JSON file path."""
    builtin = resources.files("charter.presets").joinpath(f"{name_or_path}.json")
    if builtin.is_file():
        d = json.loads(builtin.read_text())
    else:
        p = Path(name_or_path)
        if not p.is_file():
            raise FileNotFoundError(f"no such noise preset or file: {name_or_path}")
        d = json.loads(p.read_text())
    return NoiseConfig(**d)


# -- generation -------------------------------------------------------------


def _config_digest(config: SynthConfig) -> str:
    blob = json.dumps(dataclasses.asdict(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def generate_dataset(
    out_dir: str | Path,
    seed: int,
    count: int,
    types: tuple[str, ...] = CHART_TYPES,
    config: SynthConfig = DEFAULT_CONFIG,
) -> dict:
    """Render `count` charts per type with exact ground truth; returns the
    manifest (also written to manifest.json). Deterministic in (seed, count,
    types, config)."""
    for t in types:
        if t not in CHART_TYPES:
            raise ValueError(f"unknown chart type {t!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for chart_type in types:
        for i in range(count):
            chart_seed = seed + i
            raster, gt, used_seed = _render_resampled(chart_type, chart_seed, config)
            chart_id = f"{chart_type}-{chart_seed:04d}"
            raster.save_png(out / f"{chart_id}.png")
            (out / f"{chart_id}.gt.json").write_text(gt.to_json())
            entries.append({"id": chart_id, "type": chart_type,
                            "seed": chart_seed, "render_seed": used_seed})
    manifest = {
        "version": MANIFEST_VERSION,
        "seed": seed,
        "count": count,
        "types": list(types),
        "config_digest": _config_digest(config),
        "charts": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def _render_resampled(chart_type: str, seed: int,
                      config: SynthConfig) -> tuple[Raster, GroundTruth, int]:
    """Sample/render, stepping to a far-away seed when the layout overflows
    (keeps ids stable while every chart still renders)."""
    s = seed
    while True:
        try:
            spec = sample_spec(s, chart_type, config)
            raster, gt = render(spec)
            return raster, gt, s
        except LayoutOverflow:
            s += RESAMPLE_STRIDE


def load_manifest(dataset_dir: str | Path) -> dict:
    p = Path(dataset_dir) / "manifest.json"
    if not p.is_file():
        raise FileNotFoundError(f"no manifest.json in {dataset_dir}")
    return json.loads(p.read_text())


# -- oracle serialization ---------------------------------------------------


def _box_to_dict(b: BBox) -> dict:
    return {"x_min": b.x_min, "y_min": b.y_min, "x_max": b.x_max, "y_max": b.y_max,
            "category": b.category, "score": b.score}


def _box_from_dict(d: dict) -> BBox:
    return BBox(d["x_min"], d["y_min"], d["x_max"], d["y_max"],
                d.get("category", ""), d.get("score", 1.0))


def save_detector_output(det: DetectorOutput, dataset_dir: Path, chart_id: str) -> None:
    hm_files = {}
    for cat, hm in det.heatmaps.items():
        name = f"{chart_id}.hm.{cat}.png"
        hm.save_png(dataset_dir / name)
        hm_files[cat] = name
    payload = {"schema_version": 1,
               "boxes": [_box_to_dict(b) for b in det.boxes],
               "heatmaps": hm_files}
    (dataset_dir / f"{chart_id}.det.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_detector_output(dataset_dir: Path, chart_id: str) -> DetectorOutput:
    d = json.loads((dataset_dir / f"{chart_id}.det.json").read_text())
    heatmaps = {cat: Heatmap.load_png(dataset_dir / name)
                for cat, name in d["heatmaps"].items()}
    return DetectorOutput(tuple(_box_from_dict(b) for b in d["boxes"]), heatmaps)


def save_ocr_output(ocr: OcrOutput, dataset_dir: Path, chart_id: str) -> None:
    payload = {"schema_version": 1,
               "tokens": [{"polygon": [[float(x), float(y)] for x, y in t.polygon],
                           "angle": float(t.angle),
                           "text": t.text,
                           "is_superscript_candidate": bool(t.is_superscript_candidate)}
                          for t in ocr.tokens]}
    (dataset_dir / f"{chart_id}.ocr.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_ocr_output(dataset_dir: Path, chart_id: str) -> OcrOutput:
    d = json.loads((dataset_dir / f"{chart_id}.ocr.json").read_text())
    return OcrOutput(tuple(
        OcrToken(tuple(tuple(p) for p in t["polygon"]), t["angle"], t["text"],
                 t.get("is_superscript_candidate", False))
        for t in d["tokens"]))


# -- extraction -------------------------------------------------------------


def _load_chart_inputs(dataset_dir: Path, chart_id: str, seed: int,
                       noise: NoiseConfig | None) -> tuple[DetectorOutput, OcrOutput, Raster]:
    raster = Raster.load_png(dataset_dir / f"{chart_id}.png")
    det_path = dataset_dir / f"{chart_id}.det.json"
    if noise is None and not det_path.is_file():
        raise FileNotFoundError(f"{chart_id}: no det/ocr files and no noise preset given")
    if noise is not None:
        gt = GroundTruth.load_json(dataset_dir / f"{chart_id}.gt.json")
        det = simulate_detector(gt, noise, seed)
        ocr = simulate_ocr(gt, noise, seed)
    else:
        det = load_detector_output(dataset_dir, chart_id)
        ocr = load_ocr_output(dataset_dir, chart_id)
    return det, ocr, raster


def _extract_one(args) -> tuple[str, dict | None, dict | None]:
    dataset_dir, entry, noise, config = args
    chart_id = entry["id"]
    try:
        det, ocr, raster = _load_chart_inputs(Path(dataset_dir), chart_id,
                                              entry["seed"], noise)
        table = analyze(det, ocr, raster, config)
        return chart_id, table.to_dict(), None
    except ChartAnalysisError as e:
        return chart_id, None, {"id": chart_id, "error": type(e).__name__, "message": str(e)}
    except (OSError, ValueError, KeyError) as e:
        return chart_id, None, {"id": chart_id, "error": type(e).__name__, "message": str(e)}


def extract_dataset(
    dataset_dir: str | Path,
    out_dir: str | Path,
    noise: NoiseConfig | None = None,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
    jobs: int = 1,
) -> dict:
    """Run analysis over every chart in the manifest; writes one table JSON
    per success plus failures.json. Charts are independent; reduction is in
    manifest (id) order regardless of job count."""
    dataset_dir = Path(dataset_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(dataset_dir)
    work = [(str(dataset_dir), entry, noise, config) for entry in manifest["charts"]]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_one, work))
    else:
        results = [_extract_one(w) for w in work]
    results.sort(key=lambda r: r[0])

    failures = []
    for chart_id, table_dict, failure in results:
        if table_dict is not None:
            (out / f"{chart_id}.table.json").write_text(
                json.dumps(table_dict, sort_keys=True, indent=2) + "\n")
        else:
            failures.append(failure)
    (out / "failures.json").write_text(json.dumps(failures, sort_keys=True, indent=2) + "\n")
    return {"extracted": len(results) - len(failures), "failures": failures}


# -- evaluation -------------------------------------------------------------


def evaluate_dataset(
    dataset_dir: str | Path,
    pred_dir: str | Path,
    epsilons: tuple[float, ...] = (0.01, 0.05),
    taus: tuple[float, ...] = (1.0, 0.0),
) -> dict[str, EvalReport]:
    """One EvalReport per chart type present in the manifest, keyed by type."""
    dataset_dir = Path(dataset_dir)
    pred_dir = Path(pred_dir)
    manifest = load_manifest(dataset_dir)
    by_type: dict[str, list[tuple[ChartTable | None, ChartTable]]] = {}
    for entry in manifest["charts"]:
        chart_id = entry["id"]
        gt = GroundTruth.load_json(dataset_dir / f"{chart_id}.gt.json")
        pred_path = pred_dir / f"{chart_id}.table.json"
        pred = ChartTable.load_json(pred_path) if pred_path.is_file() else None
        by_type.setdefault(entry["type"], []).append((pred, gt.table))
    return {
        chart_type: build_report(chart_type, tables, tuple(epsilons), tuple(taus),
                                 _VALUE_KIND_BY_TYPE[chart_type])
        for chart_type, tables in sorted(by_type.items())
    }


def ablate_dataset(
    dataset_dir: str | Path,
    noise: NoiseConfig,
    epsilons: tuple[float, ...] = (0.05,),
    taus: tuple[float, ...] = ABLATION_TAUS,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> AblationReport:
    """Heatmaps-vs-boxes pie ablation over the dataset's pie charts."""
    dataset_dir = Path(dataset_dir)
    manifest = load_manifest(dataset_dir)
    charts = []
    for entry in manifest["charts"]:
        if entry["type"] != "pie":
            continue
        chart_id = entry["id"]
        gt = GroundTruth.load_json(dataset_dir / f"{chart_id}.gt.json")
        raster = Raster.load_png(dataset_dir / f"{chart_id}.png")
        det = simulate_detector(gt, noise, entry["seed"])
        ocr = simulate_ocr(gt, noise, entry["seed"])
        charts.append((gt.table, det, ocr, raster))
    if not charts:
        raise ValueError(f"no pie charts in {dataset_dir}")
    return ablation_report(charts, epsilons, taus, config)


# -- overlays ---------------------------------------------------------------


def render_overlay(
    dataset_dir: str | Path,
    chart_id: str,
    out_path: str | Path,
    noise: NoiseConfig | None = None,
    config: AnalysisConfig = DEFAULT_ANALYSIS_CONFIG,
) -> None:
    """Debug PNG: detector boxes, fitted pie circle and sector boundaries,
    and recovered polylines drawn over the raster."""
    import math

    from .analysis import extract_lines, fit_pies, recover_axis
    from .categories import HM_PIE_RADIAL, HM_PIE_SECTOR_CORNER, HM_X_TICK, HM_Y_TICK
    from .analysis.pies import extract_sectors
    from .analysis import EmptyTableError

    dataset_dir = Path(dataset_dir)
    manifest = load_manifest(dataset_dir)
    entry = next((e for e in manifest["charts"] if e["id"] == chart_id), None)
    if entry is None:
        raise KeyError(f"{chart_id} not in manifest")
    det, ocr, raster = _load_chart_inputs(dataset_dir, chart_id, entry["seed"], noise)

    im = Image.fromarray(raster.array.copy(), mode="RGB")
    draw = ImageDraw.Draw(im)
    for b in det.boxes:
        draw.rectangle([b.x_min, b.y_min, b.x_max, b.y_max], outline=(255, 0, 0))

    pies = fit_pies(det.heatmaps, config, scale=config.heatmap_scale)
    for geom in pies:
        cx, cy, r = geom.center.x, geom.center.y, geom.radius
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], outline=(0, 0, 255), width=2)
        sectors = extract_sectors(geom, det.heatmaps.get(HM_PIE_RADIAL),
                                  det.heatmaps.get(HM_PIE_SECTOR_CORNER),
                                  config, scale=config.heatmap_scale)
        for s in sectors:
            ang = math.radians(s.start_angle)
            draw.line([cx, cy, cx + r * math.cos(ang), cy + r * math.sin(ang)],
                      fill=(0, 0, 255), width=2)

    axes = {
        "x": recover_axis(ocr, "x", det.heatmaps.get(HM_X_TICK), config),
        "y": recover_axis(ocr, "y", det.heatmaps.get(HM_Y_TICK), config),
    }
    if axes["x"] is not None and axes["y"] is not None:
        try:
            for series in extract_lines(raster, det.heatmaps, axes, ocr, None, config):
                px = [(axes["x"].pixel_at(x), axes["y"].pixel_at(y))
                      for x, y in series.points]
                if len(px) >= 2:
                    draw.line([c for p in px for c in p], fill=(0, 255, 0), width=1)
                for x, y in px:
                    draw.ellipse([x - 3, y - 3, x + 3, y + 3], outline=(0, 255, 0))
        except EmptyTableError:
            pass
    im.save(out_path, format="PNG")
