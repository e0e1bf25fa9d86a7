"""Ground-truth annotations emitted alongside every rendered chart."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..geometry import BBox
from ..raster import Color
from ..table import ChartTable

GT_SCHEMA_VERSION = 1

# Text roles.
ROLE_TITLE = "title"
ROLE_CAPTION = "caption"
ROLE_X_TITLE = "x_title"
ROLE_Y_TITLE = "y_title"
ROLE_TICK_X = "tick_x"
ROLE_TICK_Y = "tick_y"
ROLE_EXP_MANTISSA = "exponent_mantissa"
ROLE_EXP_DIGIT = "exponent_digit"
ROLE_BAR_LABEL = "bar_label"
ROLE_VALUE_LABEL = "value_label"
ROLE_LEGEND_TEXT = "legend_text"
ROLE_SECTOR_LABEL = "sector_label"
ROLE_DECOY = "decoy"


@dataclass(frozen=True)
class TextBox:
    text: str
    box: BBox  # axis-aligned bounds of the drawn (possibly rotated) text
    angle: float = 0.0  # rotation applied at draw time, degrees
    role: str = ""
    group: int = -1  # links mantissa/exponent pairs and decoy pairs


@dataclass(frozen=True)
class TickGT:
    axis: str  # "x" | "y"
    pixel: float  # x for the x-axis, y for the y-axis, in raster coords
    value: float
    text: str


@dataclass(frozen=True)
class AxisGT:
    """True affine pixel->value mapping of a numeric axis."""

    orientation: str  # "x" | "y"
    slope: float
    intercept: float

    def value_at(self, pixel: float) -> float:
        return self.slope * pixel + self.intercept


@dataclass(frozen=True)
class BarGT:
    box: BBox  # sub-pixel geometry of the painted bar
    color: Color
    label: str
    value: float


@dataclass(frozen=True)
class SectorGT:
    start_angle: float  # degrees, image convention (clockwise from +x)
    end_angle: float  # start + span, may exceed 360
    color: Color
    label: str
    fraction: float


@dataclass(frozen=True)
class PieGT:
    center: tuple[float, float]
    radius: float
    sectors: tuple[SectorGT, ...]


@dataclass(frozen=True)
class LineGT:
    label: str
    color: Color
    vertices: tuple[tuple[float, float], ...]  # raster coords
    dashed: bool


@dataclass(frozen=True)
class LegendEntryGT:
    swatch_box: BBox
    color: Color
    text: str


@dataclass(frozen=True)
class LegendGT:
    box: BBox
    entries: tuple[LegendEntryGT, ...]


@dataclass(frozen=True)
class GroundTruth:
    table: ChartTable
    chart_region: BBox  # stage-1 style chart box, category set per type
    plot_rect: BBox | None = None
    bars: tuple[BarGT, ...] = ()
    pies: tuple[PieGT, ...] = ()
    lines: tuple[LineGT, ...] = ()
    scatter_points: tuple[tuple[float, float], ...] = ()
    ticks: tuple[TickGT, ...] = ()
    text_boxes: tuple[TextBox, ...] = ()
    legend: LegendGT | None = None
    x_axis: AxisGT | None = None
    y_axis: AxisGT | None = None
    canvas_size: int = 512

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": GT_SCHEMA_VERSION,
            "canvas_size": self.canvas_size,
            "table": self.table.to_dict(),
            "chart_region": _box(self.chart_region),
            "plot_rect": _box(self.plot_rect) if self.plot_rect else None,
            "bars": [
                {
                    "box": _box(b.box),
                    "color": _color(b.color),
                    "label": b.label,
                    "value": float(b.value),
                }
                for b in self.bars
            ],
            "pies": [
                {
                    "center": [float(v) for v in p.center],
                    "radius": float(p.radius),
                    "sectors": [
                        {
                            "start_angle": float(s.start_angle),
                            "end_angle": float(s.end_angle),
                            "color": _color(s.color),
                            "label": s.label,
                            "fraction": float(s.fraction),
                        }
                        for s in p.sectors
                    ],
                }
                for p in self.pies
            ],
            "lines": [
                {
                    "label": ln.label,
                    "color": _color(ln.color),
                    "vertices": [[float(v[0]), float(v[1])] for v in ln.vertices],
                    "dashed": ln.dashed,
                }
                for ln in self.lines
            ],
            "scatter_points": [[float(p[0]), float(p[1])] for p in self.scatter_points],
            "ticks": [
                {"axis": t.axis, "pixel": float(t.pixel), "value": float(t.value), "text": t.text}
                for t in self.ticks
            ],
            "text_boxes": [
                {
                    "text": t.text,
                    "box": _box(t.box),
                    "angle": float(t.angle),
                    "role": t.role,
                    "group": t.group,
                }
                for t in self.text_boxes
            ],
            "legend": None
            if self.legend is None
            else {
                "box": _box(self.legend.box),
                "entries": [
                    {"swatch_box": _box(e.swatch_box), "color": _color(e.color), "text": e.text}
                    for e in self.legend.entries
                ],
            },
            "x_axis": _axis(self.x_axis),
            "y_axis": _axis(self.y_axis),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(
            table=ChartTable.from_dict(d["table"]),
            chart_region=_unbox(d["chart_region"]),
            plot_rect=_unbox(d["plot_rect"]) if d.get("plot_rect") else None,
            bars=tuple(
                BarGT(_unbox(b["box"]), _uncolor(b["color"]), b["label"], float(b["value"]))
                for b in d.get("bars", [])
            ),
            pies=tuple(
                PieGT(
                    tuple(p["center"]),
                    float(p["radius"]),
                    tuple(
                        SectorGT(
                            float(s["start_angle"]),
                            float(s["end_angle"]),
                            _uncolor(s["color"]),
                            s["label"],
                            float(s["fraction"]),
                        )
                        for s in p["sectors"]
                    ),
                )
                for p in d.get("pies", [])
            ),
            lines=tuple(
                LineGT(
                    ln["label"],
                    _uncolor(ln["color"]),
                    tuple(tuple(v) for v in ln["vertices"]),
                    bool(ln["dashed"]),
                )
                for ln in d.get("lines", [])
            ),
            scatter_points=tuple(tuple(p) for p in d.get("scatter_points", [])),
            ticks=tuple(
                TickGT(t["axis"], float(t["pixel"]), float(t["value"]), t["text"])
                for t in d.get("ticks", [])
            ),
            text_boxes=tuple(
                TextBox(t["text"], _unbox(t["box"]), float(t["angle"]), t["role"], int(t["group"]))
                for t in d.get("text_boxes", [])
            ),
            legend=None
            if d.get("legend") is None
            else LegendGT(
                _unbox(d["legend"]["box"]),
                tuple(
                    LegendEntryGT(_unbox(e["swatch_box"]), _uncolor(e["color"]), e["text"])
                    for e in d["legend"]["entries"]
                ),
            ),
            x_axis=_unaxis(d.get("x_axis")),
            y_axis=_unaxis(d.get("y_axis")),
            canvas_size=int(d.get("canvas_size", 512)),
        )

    @classmethod
    def load_json(cls, path: str | Path) -> "GroundTruth":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _box(b: BBox) -> dict:
    # coordinates forced to float so a serialize/parse round trip is
    # byte-identical even when a box happens to sit on integer pixels
    return {
        "x_min": float(b.x_min),
        "y_min": float(b.y_min),
        "x_max": float(b.x_max),
        "y_max": float(b.y_max),
        "category": b.category,
        "score": float(b.score),
    }


def _unbox(d: dict) -> BBox:
    return BBox(
        float(d["x_min"]), float(d["y_min"]), float(d["x_max"]), float(d["y_max"]),
        d.get("category", ""), float(d.get("score", 1.0)),
    )


def _color(c: Color) -> list[int]:
    return [c.r, c.g, c.b]


def _uncolor(v) -> Color:
    return Color(int(v[0]), int(v[1]), int(v[2]))


def _axis(a: AxisGT | None) -> dict | None:
    if a is None:
        return None
    return {"orientation": a.orientation, "slope": float(a.slope), "intercept": float(a.intercept)}


def _unaxis(d: dict | None) -> AxisGT | None:
    if d is None:
        return None
    return AxisGT(d["orientation"], float(d["slope"]), float(d["intercept"]))
