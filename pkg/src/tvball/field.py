"""Raster samples of a scalar function on a uniform grid, with CSV/PGM I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import GridMismatch
from .raster import Bitmap, _read_pgm_raw, grid_for_box


@dataclass
class Field:
    """``values[j, i]`` is the sample at origin + h*(i+1/2, j+1/2)."""

    origin: Tuple[float, float]
    h: float
    values: np.ndarray

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    def centers(self):
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.h
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.h
        return x, y

    def mesh(self):
        return np.meshgrid(*self.centers())

    def same_grid(self, other) -> bool:
        return (
            self.values.shape == getattr(other, "values", getattr(other, "bits", None)).shape
            and self.h == other.h
            and abs(self.origin[0] - other.origin[0]) <= 1e-12 * self.h
            and abs(self.origin[1] - other.origin[1]) <= 1e-12 * self.h
        )

    @classmethod
    def zeros(cls, box, h):
        origin, nx, ny = grid_for_box(box, h)
        return cls(origin, h, np.zeros((ny, nx)))


def field_distance(a: Field, b: Field) -> Tuple[float, float]:
    """(||a-b||_2 / ||b||_2, ||a-b||_inf); the ratio is inf when b vanishes and a does not."""
    if not a.same_grid(b):
        raise GridMismatch("fields live on different grids")
    diff = a.values - b.values
    nd = float(np.linalg.norm(diff))
    nb = float(np.linalg.norm(b.values))
    if nb == 0.0:
        rel = 0.0 if nd == 0.0 else math.inf
    else:
        rel = nd / nb
    return rel, float(np.abs(diff).max()) if diff.size else 0.0


def level_set(u: Field, s: float) -> Bitmap:
    """The superlevel bitmap {u >= s}."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"level must lie in [0, 1], got {s}")
    return Bitmap(u.origin, u.h, u.values >= s)


def write_csv(f: Field, path) -> None:
    """Header line ``nx,ny,h,ox,oy`` then one row per grid row (y increasing)."""
    with open(path, "w") as fh:
        fh.write("nx,ny,h,ox,oy\n")
        fh.write(f"{f.nx},{f.ny},{f.h:.17g},{f.origin[0]:.17g},{f.origin[1]:.17g}\n")
        for row in f.values:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def read_csv(path) -> Field:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "nx,ny,h,ox,oy":
            raise ValueError(f"unexpected field header {header!r}")
        nx, ny, h, ox, oy = fh.readline().strip().split(",")
        vals = np.loadtxt(fh, delimiter=",", ndmin=2)
    vals = vals.reshape(int(ny), int(nx))
    return Field((float(ox), float(oy)), float(h), vals)


def write_pgm16(f: Field, path) -> None:
    """16-bit P5, value = round(u * 65535), top row is the largest y."""
    img = np.round(np.clip(f.values, 0.0, 1.0) * 65535.0).astype(">u2")[::-1]
    header = f"P5\n# origin {f.origin[0]!r} {f.origin[1]!r} h {f.h!r}\n{f.nx} {f.ny}\n65535\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(img.tobytes())


def read_pgm16(path) -> Field:
    img, maxval, meta = _read_pgm_raw(path)
    return Field(meta.get("origin", (0.0, 0.0)), meta.get("h", 1.0), img.astype(float) / maxval)
