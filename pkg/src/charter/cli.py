"""Command-line entry point: generate / extract / evaluate / ablate / overlay.

Exit codes: 0 success, 1 usage or configuration error, 2 partial batch
failure (some charts failed but the batch completed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .analysis import AnalysisConfig, DEFAULT_ANALYSIS_CONFIG
from .pipeline import (
    CHART_TYPES,
    ablate_dataset,
    evaluate_dataset,
    extract_dataset,
    generate_dataset,
    load_noise_preset,
    render_overlay,
)
from .synth import DEFAULT_CONFIG, SynthConfig

CONFIG_ENV_VAR = "CHARTER_CONFIG"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2


def _load_defaults() -> dict:
    """Optional defaults file pointed at by CHARTER_CONFIG; flags win."""
    path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"{CONFIG_ENV_VAR} points at a missing file: {path}")
    return json.loads(p.read_text())


def _analysis_config(defaults: dict) -> AnalysisConfig:
    overrides = defaults.get("analysis", {})
    return AnalysisConfig.from_dict({**DEFAULT_ANALYSIS_CONFIG.to_dict(), **overrides})


def _synth_config(defaults: dict) -> SynthConfig:
    overrides = defaults.get("synth", {})
    if not overrides:
        return DEFAULT_CONFIG
    import dataclasses

    return SynthConfig(**{**dataclasses.asdict(DEFAULT_CONFIG), **overrides})


def _parse_types(arg: str) -> tuple[str, ...]:
    types = tuple(t.strip() for t in arg.split(",") if t.strip())
    for t in types:
        if t not in CHART_TYPES:
            raise argparse.ArgumentTypeError(
                f"unknown chart type {t!r}; choose from {', '.join(CHART_TYPES)}")
    return types


def _parse_floats(arg: str) -> tuple[float, ...]:
    return tuple(float(v) for v in arg.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="charter",
        description="Synthetic chart generation, extraction, and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="render a synthetic dataset with ground truth")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--types", type=_parse_types, default=CHART_TYPES)

    e = sub.add_parser("extract", help="run analysis over a dataset")
    e.add_argument("--dataset", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--noise", default=None,
                   help="noise preset (clean|mild|harsh) or JSON path; omit to "
                        "read <id>.det.json / <id>.ocr.json from the dataset")
    e.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    v = sub.add_parser("evaluate", help="score predictions against ground truth")
    v.add_argument("--dataset", required=True)
    v.add_argument("--pred", required=True)
    v.add_argument("--out", default=None, help="report file; stdout when omitted")
    v.add_argument("--epsilon", type=_parse_floats, default=(0.01, 0.05))
    v.add_argument("--tau", type=_parse_floats, default=(1.0, 0.0))
    v.add_argument("--format", choices=("json", "csv", "md"), default="json")

    a = sub.add_parser("ablate", help="pie heatmaps-vs-boxes ablation")
    a.add_argument("--dataset", required=True)
    a.add_argument("--noise", default="mild")
    a.add_argument("--out", default=None)
    a.add_argument("--epsilon", type=_parse_floats, default=(0.05,))
    a.add_argument("--format", choices=("json", "csv", "md"), default="md")

    o = sub.add_parser("overlay", help="debug overlay PNG for one chart")
    o.add_argument("--dataset", required=True)
    o.add_argument("--id", required=True)
    o.add_argument("--out", required=True)
    o.add_argument("--noise", default=None)

    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        defaults = _load_defaults()
        analysis_cfg = _analysis_config(defaults)
        synth_cfg = _synth_config(defaults)
        t0 = time.perf_counter()

        if args.command == "generate":
            manifest = generate_dataset(args.out, args.seed, args.count,
                                        args.types, synth_cfg)
            _log(args.out, {"command": "generate",
                            "charts": len(manifest["charts"]),
                            "elapsed_s": time.perf_counter() - t0})
            return EXIT_OK

        if args.command == "extract":
            noise = load_noise_preset(args.noise) if args.noise else None
            result = extract_dataset(args.dataset, args.out, noise,
                                     analysis_cfg, jobs=max(1, args.jobs))
            _log(args.out, {"command": "extract", **{k: v for k, v in result.items()
                                                     if k == "extracted"},
                            "failure_count": len(result["failures"]),
                            "elapsed_s": time.perf_counter() - t0})
            return EXIT_PARTIAL if result["failures"] else EXIT_OK

        if args.command == "evaluate":
            reports = evaluate_dataset(args.dataset, args.pred,
                                       args.epsilon, args.tau)
            if args.format == "json":
                text = json.dumps({t: r.to_dict() for t, r in reports.items()},
                                  sort_keys=True, indent=2) + "\n"
            elif args.format == "csv":
                text = "".join(f"# {t}\n{r.to_csv()}" for t, r in reports.items())
            else:
                text = "\n".join(r.to_markdown() for r in reports.values())
            _emit(text, args.out)
            return EXIT_OK

        if args.command == "ablate":
            noise = load_noise_preset(args.noise)
            report = ablate_dataset(args.dataset, noise, args.epsilon,
                                    config=analysis_cfg)
            text = {"json": report.to_json, "csv": report.to_csv,
                    "md": report.to_markdown}[args.format]()
            _emit(text, args.out)
            return EXIT_OK

        if args.command == "overlay":
            noise = load_noise_preset(args.noise) if args.noise else None
            render_overlay(args.dataset, args.id, args.out, noise, analysis_cfg)
            return EXIT_OK

        parser.error(f"unknown command {args.command!r}")
        return EXIT_USAGE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"charter: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def _log(out_dir: str, payload: dict) -> None:
    """Timestamps live only here so artifacts stay byte-identical across runs."""
    p = Path(out_dir) / "run-log.jsonl"
    entry = {"time": time.time(), **payload}
    with p.open("a") as f:
        f.write(json.dumps(entry, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())
