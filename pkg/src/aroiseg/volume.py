"""Volume and mask containers plus the 2-D patch operations the pipeline is built on.

Conventions used throughout the package:

* voxel indexing is (z, y, x), z-major storage, half-open integer intervals;
* a 2-D mask ("Mask2D") is a plain ``numpy`` array of dtype uint8 with values
  in {0, 1}, shaped (rows, cols) = (y, x) for axial patches;
* patches are row-major, so ``pixels[r, c]`` has r along the patch height.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

Axis = Literal["coronal", "sagittal"]
PatchKind = Literal["intensity", "probability", "binary"]
ResizeMethod = Literal["bilinear", "nearest"]

#: Default intensity window (HU) used to condition network inputs.
DEFAULT_HU_WINDOW: tuple[float, float] = (-1000.0, 400.0)


@dataclass(frozen=True)
class Volume3D:
    """A signed 16-bit intensity grid (HU) with per-axis spacing in mm.

    ``spacing_mm_zyx[0]`` holds the slice thickness.
    """

    voxels: np.ndarray
    spacing_mm_zyx: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        if self.voxels.ndim != 3:
            raise ValueError(f"volume must be 3-D, got shape {self.voxels.shape}")
        if self.voxels.dtype != np.int16:
            raise ValueError(f"volume dtype must be int16, got {self.voxels.dtype}")
        spacing = tuple(float(s) for s in self.spacing_mm_zyx)
        if len(spacing) != 3 or any(s <= 0 for s in spacing):
            raise ValueError(f"spacing entries must be positive, got {self.spacing_mm_zyx}")
        object.__setattr__(self, "spacing_mm_zyx", spacing)

    @property
    def shape_zyx(self) -> tuple[int, int, int]:
        return self.voxels.shape


@dataclass
class Mask3D:
    """A binary label grid aligned to a Volume3D (or to a Voi3D box)."""

    voxels: np.ndarray

    def __post_init__(self) -> None:
        if self.voxels.ndim != 3:
            raise ValueError(f"mask must be 3-D, got shape {self.voxels.shape}")
        if self.voxels.dtype != np.uint8:
            raise ValueError(f"mask dtype must be uint8, got {self.voxels.dtype}")
        if self.voxels.max(initial=0) > 1:
            raise ValueError("mask voxels must be 0 or 1")

    @classmethod
    def zeros(cls, shape_zyx: tuple[int, int, int]) -> "Mask3D":
        return cls(np.zeros(shape_zyx, dtype=np.uint8))

    @property
    def shape_zyx(self) -> tuple[int, int, int]:
        return self.voxels.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.voxels))


@dataclass(frozen=True)
class Roi2D:
    """An axis-aligned square window [x1,x2) x [y1,y2) on axial slice ``z``."""

    x1: int
    x2: int
    y1: int
    y2: int
    z: int

    def __post_init__(self) -> None:
        for name in ("x1", "x2", "y1", "y2", "z"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise ValueError(f"ROI intervals must be non-empty: {self}")
        if self.x2 - self.x1 != self.y2 - self.y1:
            raise ValueError(f"ROI must be square: {self}")

    @property
    def side(self) -> int:
        return self.x2 - self.x1

    @property
    def area(self) -> int:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def in_bounds(self, x_extent: int, y_extent: int) -> bool:
        return 0 <= self.x1 and self.x2 <= x_extent and 0 <= self.y1 and self.y2 <= y_extent


@dataclass(frozen=True)
class Voi3D:
    """An axis-aligned 3-D box in voxel coordinates, half-open on every axis."""

    z1: int
    z2: int
    y1: int
    y2: int
    x1: int
    x2: int

    def __post_init__(self) -> None:
        for name in ("z1", "z2", "y1", "y2", "x1", "x2"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.z2 <= self.z1 or self.y2 <= self.y1 or self.x2 <= self.x1:
            raise ValueError(f"VOI intervals must be non-empty: {self}")

    @property
    def shape_zyx(self) -> tuple[int, int, int]:
        return (self.z2 - self.z1, self.y2 - self.y1, self.x2 - self.x1)

    def in_bounds(self, shape_zyx: tuple[int, int, int]) -> bool:
        zdim, ydim, xdim = shape_zyx
        return (
            0 <= self.z1 and self.z2 <= zdim
            and 0 <= self.y1 and self.y2 <= ydim
            and 0 <= self.x1 and self.x2 <= xdim
        )


@dataclass(frozen=True)
class Patch2D:
    """A 2-D pixel block: an intensity crop, a probability map, or a binary mask."""

    pixels: np.ndarray
    kind: PatchKind

    def __post_init__(self) -> None:
        if self.pixels.ndim != 2:
            raise ValueError(f"patch must be 2-D, got shape {self.pixels.shape}")
        if self.pixels.dtype != np.float64:
            object.__setattr__(self, "pixels", self.pixels.astype(np.float64))
        if self.kind == "probability":
            if self.pixels.size and (self.pixels.min() < 0.0 or self.pixels.max() > 1.0):
                raise ValueError("probability patch has pixels outside [0, 1]")
        elif self.kind == "binary":
            if not np.isin(self.pixels, (0.0, 1.0)).all():
                raise ValueError("binary patch has pixels outside {0, 1}")
        elif self.kind != "intensity":
            raise ValueError(f"unknown patch kind {self.kind!r}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def crop_axial(vol: Volume3D, roi: Roi2D) -> Patch2D:
    """Cut the ROI window out of axial slice ``roi.z``.

    Pixel (r, c) of the result equals voxel (roi.z, roi.y1 + r, roi.x1 + c).
    """
    zdim, ydim, xdim = vol.shape_zyx
    if not (0 <= roi.z < zdim) or not roi.in_bounds(xdim, ydim):
        raise ValueError(f"ROI {roi} outside volume of shape {vol.shape_zyx}")
    block = vol.voxels[roi.z, roi.y1:roi.y2, roi.x1:roi.x2]
    return Patch2D(block.astype(np.float64), "intensity")


def extract_view_slices(vol: Volume3D, voi: Voi3D, axis: Axis) -> list[Patch2D]:
    """Slice the VOI sub-volume along ``axis``.

    Coronal slices are taken per y (one patch per y index, width along x);
    sagittal per x (width along y). z maps to patch height in both views.
    """
    if not voi.in_bounds(vol.shape_zyx):
        raise ValueError(f"VOI {voi} outside volume of shape {vol.shape_zyx}")
    sub = vol.voxels[voi.z1:voi.z2, voi.y1:voi.y2, voi.x1:voi.x2].astype(np.float64)
    if axis == "coronal":
        return [Patch2D(sub[:, j, :], "intensity") for j in range(sub.shape[1])]
    if axis == "sagittal":
        return [Patch2D(sub[:, :, k], "intensity") for k in range(sub.shape[2])]
    raise ValueError(f"unknown view axis {axis!r}")


def _source_coords(dst: int, src: int) -> np.ndarray:
    # Pixel-center alignment: source index = (i + 0.5) * src/dst - 0.5, clamped.
    return np.clip((np.arange(dst) + 0.5) * (src / dst) - 0.5, 0.0, src - 1.0)


def _resize_bilinear(a: np.ndarray, tw: int, th: int) -> np.ndarray:
    ys = _source_coords(th, a.shape[0])
    xs = _source_coords(tw, a.shape[1])
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, a.shape[0] - 1)
    x1 = np.minimum(x0 + 1, a.shape[1] - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = a[np.ix_(y0, x0)] * (1.0 - fx) + a[np.ix_(y0, x1)] * fx
    bot = a[np.ix_(y1, x0)] * (1.0 - fx) + a[np.ix_(y1, x1)] * fx
    return top * (1.0 - fy) + bot * fy


def _resize_nearest(a: np.ndarray, tw: int, th: int) -> np.ndarray:
    ys = np.floor(_source_coords(th, a.shape[0]) + 0.5).astype(np.intp)
    xs = np.floor(_source_coords(tw, a.shape[1]) + 0.5).astype(np.intp)
    return a[np.ix_(ys, xs)]


def resize_patch(p: Patch2D, tw: int, th: int, method: ResizeMethod) -> Patch2D:
    """Resize to (tw, th). Bilinear for graded data, nearest for label data.

    Bilinear output of a binary patch is no longer binary, so its kind is
    downgraded to "probability" (values stay inside [0, 1]).
    """
    if tw < 1 or th < 1:
        raise ValueError(f"target size must be positive, got {(tw, th)}")
    if (tw, th) == (p.width, p.height):
        return Patch2D(p.pixels.copy(), p.kind)
    if method == "bilinear":
        out = _resize_bilinear(p.pixels, tw, th)
        kind = "probability" if p.kind == "binary" else p.kind
        if kind == "probability":
            out = np.clip(out, 0.0, 1.0)  # convex combinations; clip float fuzz only
        return Patch2D(out, kind)
    if method == "nearest":
        return Patch2D(_resize_nearest(p.pixels, tw, th).copy(), p.kind)
    raise ValueError(f"unknown resize method {method!r}")


def normalize_hu(p: Patch2D, lo: float = DEFAULT_HU_WINDOW[0], hi: float = DEFAULT_HU_WINDOW[1]) -> Patch2D:
    """Map intensities affinely so [lo, hi] becomes [0, 1], clamping outside."""
    if lo >= hi:
        raise ValueError(f"window must satisfy lo < hi, got [{lo}, {hi}]")
    out = np.clip((p.pixels - lo) / (hi - lo), 0.0, 1.0)
    return Patch2D(out, "probability")


def embed_slice_mask(acc: Mask3D, m: np.ndarray, roi: Roi2D) -> Mask3D:
    """Overwrite the ROI window of slice ``roi.z`` in ``acc`` with mask ``m``.

    Mutates ``acc`` in place (callers serialize embeds per accumulator) and
    returns it for chaining.
    """
    m = np.asarray(m)
    if m.shape != (roi.side, roi.side):
        raise ValueError(f"mask shape {m.shape} does not match ROI side {roi.side}")
    if m.max(initial=0) > 1:
        raise ValueError("slice mask values must be 0 or 1")
    zdim, ydim, xdim = acc.shape_zyx
    if not (0 <= roi.z < zdim) or not roi.in_bounds(xdim, ydim):
        raise ValueError(f"ROI {roi} outside accumulator of shape {acc.shape_zyx}")
    acc.voxels[roi.z, roi.y1:roi.y2, roi.x1:roi.x2] = m.astype(np.uint8)
    return acc
