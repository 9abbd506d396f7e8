"""Stage I: seed-driven axial slice walking with an adaptive square ROI.

Starting from a user-placed seed ROI on one axial slice, the walker segments
that slice, then steps to neighbouring slices in both directions. Before
each step the ROI is re-centred and, when the nodule fills too much of it,
grown, so a drifting or swelling nodule stays inside the crop:

* translation: the ROI shifts by the full margin differential, left margin
  minus right and top minus bottom, steering toward the nodule's new centre;
* growth: when nodule area / ROI area exceeds the ratio bound ``rt``, every
  edge is pushed outward by ``ceil(sqrt(area_n / rt - area_roi) / 2)``,
  which restores the bound before clamping (growth only, never shrink).

A direction stops at the first slice whose segmentation comes back empty,
at the volume boundary, or after ``max_steps`` slices. Only slices that
produced a non-empty mask are recorded.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .backends import SegmenterBackend, segment_patch
from .volume import (DEFAULT_HU_WINDOW, Mask3D, Patch2D, Roi2D, Voi3D,
                     Volume3D, crop_axial, embed_slice_mask, normalize_hu,
                     resize_patch)


@dataclass(frozen=True)
class Margins:
    """Pixel gaps between a mask's bounding box and the ROI edges."""

    dl: int
    dr: int
    dt: int
    db: int


def mask_margins(m: np.ndarray, side: int) -> Margins:
    """Margins of the non-zero extent of ``m`` inside a ``side``-square ROI."""
    rows = np.flatnonzero(m.any(axis=1))
    cols = np.flatnonzero(m.any(axis=0))
    if rows.size == 0:
        raise ValueError("mask is empty; margins are undefined")
    return Margins(dl=int(cols[0]), dr=int(side - (cols[-1] + 1)),
                   dt=int(rows[0]), db=int(side - (rows[-1] + 1)))


@dataclass(frozen=True)
class AroiConfig:
    """Knobs of the slice walker.

    rt: upper bound on nodule area / ROI area before the ROI grows
    max_steps: most slices visited in one direction from the seed
    prob_threshold: probability cut that binarizes backend output
    """

    rt: float = 0.6
    max_steps: int = 64
    prob_threshold: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.rt < 1.0:
            raise ValueError(f"rt must be in (0, 1), got {self.rt}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if not 0.0 < self.prob_threshold <= 1.0:
            raise ValueError(
                f"prob_threshold must be in (0, 1], got {self.prob_threshold}")


def update_roi(roi: Roi2D, m: np.ndarray, cfg: AroiConfig,
               bounds: tuple[int, int]) -> Roi2D:
    """Next-slice ROI: translate by the margin differential, grow if crowded.

    ``bounds`` is the (x_extent, y_extent) of the volume. The translated and
    grown square is clamped back inside it; if the grown side exceeds one
    extent it is shrunk to fit that axis (centre preserved), and if it
    exceeds both the nodule cannot be tracked at this ratio, which raises.
    """
    x_extent, y_extent = bounds
    mg = mask_margins(m, roi.side)
    x1 = roi.x1 + (mg.dl - mg.dr)
    y1 = roi.y1 + (mg.dt - mg.db)
    new_side = roi.side

    area_n = int(np.count_nonzero(m))
    if area_n / roi.area > cfg.rt:
        delta_area = area_n / cfg.rt - roi.area
        ds = math.ceil(math.sqrt(delta_area) / 2)
        x1 -= ds
        y1 -= ds
        new_side = roi.side + 2 * ds

    if new_side > x_extent and new_side > y_extent:
        raise ValueError(
            f"ROI side {new_side} exceeds both volume extents {bounds}")
    if new_side > x_extent:
        y1 += (new_side - x_extent) // 2
        new_side = x_extent
    elif new_side > y_extent:
        x1 += (new_side - y_extent) // 2
        new_side = y_extent

    x1 = min(max(x1, 0), x_extent - new_side)
    y1 = min(max(y1, 0), y_extent - new_side)
    return Roi2D(x1=x1, x2=x1 + new_side, y1=y1, y2=y1 + new_side, z=roi.z)


def segment_slice(vol: Volume3D, roi: Roi2D, backend: SegmenterBackend,
                  cfg: AroiConfig, *,
                  hu_window: tuple[float, float] = DEFAULT_HU_WINDOW) -> np.ndarray:
    """Segment one axial ROI; returns a uint8 mask at the ROI's native size.

    The crop is normalized, resized to the backend's axial input size,
    inferred, binarized at ``cfg.prob_threshold``, and resized back with a
    label-preserving (nearest) resize.
    """
    patch = normalize_hu(crop_axial(vol, roi), *hu_window)
    w, h = backend.spec.input_sizes["axial"]
    probs = segment_patch(backend, "axial", resize_patch(patch, w, h, "bilinear"))
    binary = Patch2D((probs.pixels >= cfg.prob_threshold).astype(np.float64), "binary")
    return resize_patch(binary, roi.side, roi.side, "nearest").pixels.astype(np.uint8)


@dataclass(frozen=True)
class Stage1Result:
    """Axial mask plus the per-slice ROI geometry that produced it."""

    mask: Mask3D
    rois: Mapping[int, Roi2D]
    seed_z: int

    @property
    def is_empty(self) -> bool:
        return len(self.rois) == 0

    @property
    def slices_covered(self) -> int:
        return len(self.rois)


def stage1_walk(vol: Volume3D, seed: Roi2D, backend: SegmenterBackend,
                cfg: AroiConfig | None = None, *,
                hu_window: tuple[float, float] = DEFAULT_HU_WINDOW) -> Stage1Result:
    """Walk axially from the seed ROI in both directions.

    Both directions restart from the seed slice's ROI and mask. An empty
    segmentation on the seed slice itself yields an empty result with no
    recorded ROIs.
    """
    cfg = cfg or AroiConfig()
    nz, ny, nx = vol.shape_zyx
    if not 0 <= seed.z < nz:
        raise ValueError(f"seed slice {seed.z} outside volume of {nz} slices")
    if not seed.in_bounds(nx, ny):
        raise ValueError(f"seed ROI {seed} outside volume extent ({nx}, {ny})")

    acc = Mask3D.zeros(vol.shape_zyx)
    rois: dict[int, Roi2D] = {}

    seed_mask = segment_slice(vol, seed, backend, cfg, hu_window=hu_window)
    if not seed_mask.any():
        return Stage1Result(mask=acc, rois={}, seed_z=seed.z)
    embed_slice_mask(acc, seed_mask, seed)
    rois[seed.z] = seed

    for direction in (1, -1):
        roi, m = seed, seed_mask
        for _ in range(cfg.max_steps):
            z = roi.z + direction
            if not 0 <= z < nz:
                break
            roi = dataclasses.replace(update_roi(roi, m, cfg, (nx, ny)), z=z)
            m = segment_slice(vol, roi, backend, cfg, hu_window=hu_window)
            if not m.any():
                break
            embed_slice_mask(acc, m, roi)
            rois[z] = roi

    return Stage1Result(mask=acc, rois=dict(sorted(rois.items())), seed_z=seed.z)


def extract_voi(result: Stage1Result, pad: int = 0) -> Voi3D:
    """Tight half-open bounding box of the stage-I mask, grown by ``pad``.

    Padding is clamped to the volume; an empty result has no box and raises.
    """
    if pad < 0:
        raise ValueError(f"pad must be >= 0, got {pad}")
    vox = result.mask.voxels
    if not vox.any():
        raise ValueError("stage-I mask is empty; no box to extract")
    zs, ys, xs = np.nonzero(vox)
    nz, ny, nx = vox.shape
    return Voi3D(z1=max(int(zs.min()) - pad, 0), z2=min(int(zs.max()) + 1 + pad, nz),
                 y1=max(int(ys.min()) - pad, 0), y2=min(int(ys.max()) + 1 + pad, ny),
                 x1=max(int(xs.min()) - pad, 0), x2=min(int(xs.max()) + 1 + pad, nx))
