"""Raster oracle: bitmaps, discrete-disk morphology and Cauchy-Crofton measures.

Nothing here uses the arc geometry except for sampling a region at pixel
centres, so these routines serve as an independent check of the exact
constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull

from .energy import EnergyParams, energy_from_measures
from .errors import BoxTooSmall, GridMismatch, MalformedBoundary, StructuringElementTooSmall
from .geometry import Arc, Kind, Region, TwoBallConfig, contains

Box = Tuple[float, float, float, float]  # xmin, xmax, ymin, ymax


@dataclass
class Bitmap:
    """Binary image; ``bits[j, i]`` is the pixel centred at origin + h*(i+1/2, j+1/2)."""

    origin: Tuple[float, float]
    h: float
    bits: np.ndarray

    @property
    def ny(self) -> int:
        return self.bits.shape[0]

    @property
    def nx(self) -> int:
        return self.bits.shape[1]

    def centers(self):
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.h
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.h
        return x, y

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def area(self) -> float:
        return self.count() * self.h * self.h

    def same_grid(self, other: "Bitmap") -> bool:
        return self.bits.shape == other.bits.shape and self.h == other.h and np.allclose(self.origin, other.origin, rtol=0, atol=1e-12 * self.h)


def grid_for_box(box: Box, h: float):
    """Pixel-centre axes of the grid covering ``box`` (rounded outward)."""
    xmin, xmax, ymin, ymax = box
    if not h > 0:
        raise ValueError(f"grid step must be positive, got {h}")
    nx = int(math.ceil((xmax - xmin) / h - 1e-9))
    ny = int(math.ceil((ymax - ymin) / h - 1e-9))
    return (xmin, ymin), nx, ny


def region_bbox(reg: Region) -> Box:
    xs, ys = [], []
    for p in reg.pieces:
        xs += [p.start[0], p.end[0]]
        ys += [p.start[1], p.end[1]]
        if isinstance(p, Arc):
            lo = min(p.theta_start, p.theta_end)
            for ang in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
                if (ang - lo) % (2 * math.pi) <= p.span:
                    x, y = p.point_at(ang)
                    xs.append(x)
                    ys.append(y)
    return min(xs), max(xs), min(ys), max(ys)


def raster_shape(obj: Union[TwoBallConfig, Region], box: Box, h: float) -> Bitmap:
    """Pixel-centre sampling of the datum S or of a region."""
    if isinstance(obj, TwoBallConfig):
        bb = (-obj.r1, obj.D + obj.r2, -obj.r1, obj.r1)
    elif obj.kind is Kind.EMPTY:
        bb = None
    else:
        if not obj.loops:
            raise MalformedBoundary("region without boundary")
        bb = region_bbox(obj)
    if bb is not None:
        tol = 1e-9
        if bb[0] < box[0] - tol or bb[1] > box[1] + tol or bb[2] < box[2] - tol or bb[3] > box[3] + tol:
            raise BoxTooSmall(f"box {box} does not cover shape bounds {bb}")
    origin, nx, ny = grid_for_box(box, h)
    x = origin[0] + (np.arange(nx) + 0.5) * h
    y = origin[1] + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(x, y)
    if isinstance(obj, TwoBallConfig):
        bits = obj.in_S(X, Y)
    else:
        bits = contains(obj, X, Y)
    return Bitmap(origin, h, bits)


def _pad(b: Bitmap, n: int) -> Bitmap:
    bits = np.pad(b.bits, n, constant_values=False)
    return Bitmap((b.origin[0] - n * b.h, b.origin[1] - n * b.h), b.h, bits)


def _crop(b: Bitmap, n: int) -> Bitmap:
    return Bitmap((b.origin[0] + n * b.h, b.origin[1] + n * b.h), b.h, b.bits[n:-n, n:-n].copy())


def _dilate(bits, rp):
    if not bits.any():
        return bits.copy()
    return ndimage.distance_transform_edt(~bits) <= rp


def _erode(bits, rp):
    if bits.all():
        return bits.copy()
    return ndimage.distance_transform_edt(bits) > rp


def _hull_bits(b: Bitmap) -> np.ndarray:
    jj, ii = np.nonzero(b.bits)
    if len(ii) < 3:
        return b.bits.copy()
    pts = np.column_stack([ii, jj]).astype(float)
    try:
        hull = ConvexHull(pts)
    except Exception:  # collinear pixel set
        return b.bits.copy()
    J, I = np.mgrid[0 : b.ny, 0 : b.nx]
    inside = np.ones(b.bits.shape, dtype=bool)
    for a, bb, c in hull.equations:
        inside &= a * I + bb * J + c <= 1e-9
    return inside


def morph(b: Bitmap, op: str, r: float) -> Bitmap:
    """Dilation, erosion, opening or closing by the discrete disk of radius r.

    The disk is the set of pixels whose centres lie within r of the centre.
    ``Open_r(X)`` is the union of r-disks inside X (erode, then dilate) and
    ``Close_r(X)`` is the complement of the opening of the complement
    (dilate, then erode).  The bitmap is padded by ceil(r/h)+2 pixels so the
    complement is never clipped.  ``r = inf`` is accepted for closing and
    gives the convex hull of the pixel centres.
    """
    if op not in ("dilate", "erode", "open", "close"):
        raise ValueError(f"unknown morphology op {op!r}")
    if math.isinf(r):
        if op != "close":
            raise StructuringElementTooSmall("infinite radius only makes sense for closing")
        return Bitmap(b.origin, b.h, _hull_bits(b))
    if r < b.h:
        raise StructuringElementTooSmall(f"radius {r} below grid step {b.h}")
    n = int(math.ceil(r / b.h)) + 2
    P = _pad(b, n)
    rp = r / b.h
    bits = P.bits
    if op == "dilate":
        out = _dilate(bits, rp)
    elif op == "erode":
        out = _erode(bits, rp)
    elif op == "open":
        out = _dilate(_erode(bits, rp), rp)
    else:
        out = _erode(_dilate(bits, rp), rp)
    return _crop(Bitmap(P.origin, P.h, out), n)


# Lattice directions for the Cauchy-Crofton formula, one per line family.
CROFTON_DIRECTIONS = [
    (1, 0), (0, 1), (1, 1), (-1, 1),
    (2, 1), (1, 2), (-1, 2), (-2, 1),
    (3, 1), (1, 3), (-1, 3), (-3, 1),
    (3, 2), (2, 3), (-2, 3), (-3, 2),
]


def _crofton_weights(dirs):
    ang = np.array([math.atan2(b, a) % math.pi for a, b in dirs])
    order = np.argsort(ang)
    s = ang[order]
    prev = np.roll(s, 1)
    prev[0] -= math.pi
    nxt = np.roll(s, -1)
    nxt[-1] += math.pi
    w = np.empty(len(dirs))
    w[order] = 0.5 * (nxt - prev)
    return w


CROFTON_WEIGHTS = _crofton_weights(CROFTON_DIRECTIONS)


def crofton_perimeter(bits: np.ndarray, h: float) -> float:
    """Perimeter from boundary crossings of 16 families of lattice lines."""
    B = np.pad(bits.astype(bool), 3, constant_values=False)
    ny, nx = B.shape
    total = 0.0
    for (a, b), w in zip(CROFTON_DIRECTIONS, CROFTON_WEIGHTS):
        # compare each pixel with its neighbour one lattice step along (a, b)
        A0 = B[max(0, -b) : ny - max(0, b), max(0, -a) : nx - max(0, a)]
        A1 = B[max(0, b) : ny + min(0, b), max(0, a) : nx + min(0, a)]
        crossings = np.count_nonzero(A0 != A1)
        norm = math.hypot(a, b)
        total += w * crossings * h / norm
    return 0.5 * total


def raster_measures(b: Bitmap) -> Tuple[float, float]:
    return crofton_perimeter(b.bits, b.h), b.area()


def raster_energy(b: Bitmap, raster_S: Bitmap, p: EnergyParams) -> float:
    if not b.same_grid(raster_S):
        raise GridMismatch("bitmaps live on different grids")
    if not b.bits.any():
        return 0.0
    h2 = b.h * b.h
    area_in = np.count_nonzero(b.bits & raster_S.bits) * h2
    area_out = np.count_nonzero(b.bits & ~raster_S.bits) * h2
    return energy_from_measures(crofton_perimeter(b.bits, b.h), area_in, area_out, p)


def hausdorff(a: Bitmap, b: Bitmap) -> float:
    """Hausdorff distance between the pixel-centre sets (inf if exactly one is empty)."""
    if not a.same_grid(b):
        raise GridMismatch("bitmaps live on different grids")
    if not a.bits.any() and not b.bits.any():
        return 0.0
    if not a.bits.any() or not b.bits.any():
        return math.inf
    da = ndimage.distance_transform_edt(~b.bits)[a.bits].max() if (a.bits & ~b.bits).any() else 0.0
    db = ndimage.distance_transform_edt(~a.bits)[b.bits].max() if (b.bits & ~a.bits).any() else 0.0
    return float(max(da, db)) * a.h


def is_connected(b: Bitmap) -> bool:
    _, n = ndimage.label(b.bits, structure=np.ones((3, 3)))
    return n == 1


def write_pgm(b: Bitmap, path) -> None:
    """P5 / maxval 255 with 0/255 coding; top row is the largest y."""
    img = np.where(b.bits[::-1], 255, 0).astype(np.uint8)
    header = f"P5\n# origin {b.origin[0]!r} {b.origin[1]!r} h {b.h!r}\n{b.nx} {b.ny}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(img.tobytes())


def _read_pgm_raw(path):
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, comments = [], []
    pos = 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            end = data.index(b"\n", pos)
            comments.append(data[pos + 1 : end].decode("ascii").split())
            pos = end + 1
            continue
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        tokens.append(data[pos:end].decode("ascii"))
        pos = end
    if tokens[0] != "P5":
        raise ValueError(f"not a binary PGM: magic {tokens[0]!r}")
    nx, ny, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    pos += 1
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    img = np.frombuffer(data, dtype=dtype, count=nx * ny, offset=pos).reshape(ny, nx)
    meta = {}
    for c in comments:
        if len(c) == 5 and c[0] == "origin" and c[3] == "h":
            meta = {"origin": (float(c[1]), float(c[2])), "h": float(c[4])}
    return img[::-1], maxval, meta


def read_pgm(path) -> Bitmap:
    img, maxval, meta = _read_pgm_raw(path)
    return Bitmap(meta.get("origin", (0.0, 0.0)), meta.get("h", 1.0), img > maxval // 2)
