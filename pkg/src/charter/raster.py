"""RGB raster and confidence-heatmap containers with PNG serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


@dataclass(frozen=True)
class Color:
    r: int
    g: int
    b: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)

    @staticmethod
    def distance(a: "Color | np.ndarray", b: "Color | np.ndarray") -> float:
        """Euclidean RGB distance."""
        va = a.as_array() if isinstance(a, Color) else np.asarray(a, dtype=np.float64)
        vb = b.as_array() if isinstance(b, Color) else np.asarray(b, dtype=np.float64)
        return float(np.linalg.norm(va - vb))


class Raster:
    """Row-major RGB image, 8 bit per channel.

    Wraps an (H, W, 3) uint8 array; the array is treated as immutable once
    the raster is constructed.
    """

    def __init__(self, array: np.ndarray):
        arr = np.asarray(array, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("raster must be at least 1x1")
        arr.setflags(write=False)
        self.array = arr

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @classmethod
    def filled(cls, width: int, height: int, color: Color) -> "Raster":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:, :] = color.as_tuple()
        return cls(arr)

    def save_png(self, path: str | Path) -> None:
        Image.fromarray(self.array, mode="RGB").save(path, format="PNG")

    @classmethod
    def load_png(cls, path: str | Path) -> "Raster":
        with Image.open(path) as im:
            return cls(np.asarray(im.convert("RGB")))

    def __eq__(self, other) -> bool:
        return isinstance(other, Raster) and np.array_equal(self.array, other.array)


class Heatmap:
    """Single-channel confidence grid with values in [0, 1] and a category tag."""

    def __init__(self, values: np.ndarray, category: str):
        vals = np.asarray(values, dtype=np.float32)
        if vals.ndim != 2:
            raise ValueError(f"expected 2-D value grid, got shape {vals.shape}")
        if vals.size and (float(vals.min()) < 0.0 or float(vals.max()) > 1.0 + 1e-6):
            raise ValueError("heatmap values must lie in [0, 1]")
        vals = np.clip(vals, 0.0, 1.0)
        vals.setflags(write=False)
        self.values = vals
        self.category = category

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zeros(cls, width: int, height: int, category: str) -> "Heatmap":
        return cls(np.zeros((height, width), dtype=np.float32), category)

    def save_png(self, path: str | Path) -> None:
        """16-bit grayscale PNG plus a JSON sidecar naming category and resolution."""
        path = Path(path)
        quant = np.round(self.values.astype(np.float64) * 65535.0).astype(np.uint16)
        Image.fromarray(quant).save(path, format="PNG")
        sidecar = {
            "category": self.category,
            "width": self.width,
            "height": self.height,
            "encoding": "uint16/65535",
        }
        path.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")

    @classmethod
    def load_png(cls, path: str | Path) -> "Heatmap":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        with Image.open(path) as im:
            quant = np.asarray(im, dtype=np.uint16)
        vals = quant.astype(np.float32) / 65535.0
        if (meta["height"], meta["width"]) != quant.shape:
            raise ValueError(f"sidecar resolution mismatch for {path}")
        return cls(vals, meta["category"])
