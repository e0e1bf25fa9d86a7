"""Recovered tabular data: the final output of chart analysis.

The same structure doubles as the ground-truth table carried by the
synthetic generator, so round-trip comparisons are field-by-field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

TABLE_SCHEMA_VERSION = 1

# Provenance tags for recovered values/labels.
PROV_AXIS = "axis-interpolated"
PROV_VALUE_ON_BAR = "value-on-bar"
PROV_LEGEND = "legend"
PROV_CONNECTOR = "connector"
PROV_ADJACENT = "adjacent-text"
PROV_GROUND_TRUTH = "ground-truth"
PROV_POSITIONAL = "positional"


@dataclass(frozen=True)
class Row:
    """One bar or pie sector: a label and a scalar value.

    For pies the value is the sector's fraction of the whole (sums to 1
    across rows); for bars it is in axis units.
    """

    label: str
    value: float
    provenance: str = PROV_GROUND_TRUTH
    confidence: float = 1.0


@dataclass(frozen=True)
class Series:
    """One plotted line or scatter cloud: a label and ordered (x, y) pairs."""

    label: str
    points: tuple[tuple[float, float], ...]
    provenance: str = PROV_GROUND_TRUTH
    confidence: float = 1.0


@dataclass(frozen=True)
class ChartTable:
    chart_type: str
    title: str | None = None
    caption: str | None = None
    x_title: str | None = None
    y_title: str | None = None
    rows: tuple[Row, ...] = ()
    series: tuple[Series, ...] = ()

    def __post_init__(self):
        if self.chart_type == "pie" and self.rows:
            total = sum(r.value for r in self.rows)
            if abs(total - 1.0) > 0.01:
                raise ValueError(f"pie fractions sum to {total}, expected 1 +/- 0.01")
        for r in self.rows:
            if not _finite(r.value):
                raise ValueError(f"non-finite value in row {r.label!r}")
        for s in self.series:
            for x, y in s.points:
                if not (_finite(x) and _finite(y)):
                    raise ValueError(f"non-finite point in series {s.label!r}")

    def to_dict(self) -> dict:
        return {
            "schema_version": TABLE_SCHEMA_VERSION,
            "chart_type": self.chart_type,
            "title": self.title,
            "caption": self.caption,
            "x_title": self.x_title,
            "y_title": self.y_title,
            "rows": [
                {
                    "label": r.label,
                    "value": r.value,
                    "provenance": r.provenance,
                    "confidence": r.confidence,
                }
                for r in self.rows
            ],
            "series": [
                {
                    "label": s.label,
                    "points": [[x, y] for x, y in s.points],
                    "provenance": s.provenance,
                    "confidence": s.confidence,
                }
                for s in self.series
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ChartTable":
        return cls(
            chart_type=d["chart_type"],
            title=d.get("title"),
            caption=d.get("caption"),
            x_title=d.get("x_title"),
            y_title=d.get("y_title"),
            rows=tuple(
                Row(r["label"], float(r["value"]), r.get("provenance", PROV_GROUND_TRUTH),
                    float(r.get("confidence", 1.0)))
                for r in d.get("rows", [])
            ),
            series=tuple(
                Series(
                    s["label"],
                    tuple((float(x), float(y)) for x, y in s["points"]),
                    s.get("provenance", PROV_GROUND_TRUTH),
                    float(s.get("confidence", 1.0)),
                )
                for s in d.get("series", [])
            ),
        )

    @classmethod
    def load_json(cls, path: str | Path) -> "ChartTable":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_csv(self) -> str:
        """Rows or series flattened to CSV (human-facing export)."""
        lines: list[str] = []
        if self.rows:
            lines.append("label,value")
            lines.extend(f"{_csv(r.label)},{r.value!r}" for r in self.rows)
        else:
            lines.append("series,x,y")
            for s in self.series:
                lines.extend(f"{_csv(s.label)},{x!r},{y!r}" for x, y in s.points)
        return "\n".join(lines) + "\n"


def _finite(v: float) -> bool:
    return v == v and abs(v) != float("inf")


def _csv(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text
