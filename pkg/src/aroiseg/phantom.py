"""Synthetic CT volumes with exact ellipsoid ground truth.

Verification needs volumes whose true segmentation is known to the voxel.
Each phantom is a uniform background plus one or more ellipsoidal nodules;
a voxel belongs to a nodule's ground truth when its center satisfies the
ellipsoid inequality sum(((p - c) / a)^2) <= 1 against that slice's
(possibly drifted) center. Drift moves the in-plane center linearly in z,
which exercises the slice walker's tracking. Noise is seeded Gaussian, so
a spec generates bit-identical volumes on every run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .volume import Mask3D, Volume3D


@dataclass(frozen=True)
class NoduleSpec:
    """One ellipsoid: center and semi-axes in voxel units, intensity in HU.

    drift_yx_per_slice shifts the (y, x) center by that much per axial
    slice away from center z, so the column of cross-sections leans.
    """

    center_zyx: tuple[float, float, float]
    semi_axes_zyx: tuple[float, float, float]
    intensity_hu: float = 750.0
    drift_yx_per_slice: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "center_zyx", tuple(float(c) for c in self.center_zyx))
        object.__setattr__(self, "semi_axes_zyx",
                           tuple(float(a) for a in self.semi_axes_zyx))
        object.__setattr__(self, "drift_yx_per_slice",
                           tuple(float(d) for d in self.drift_yx_per_slice))
        if len(self.center_zyx) != 3 or len(self.semi_axes_zyx) != 3:
            raise ValueError("center_zyx and semi_axes_zyx must have 3 entries")
        if len(self.drift_yx_per_slice) != 2:
            raise ValueError("drift_yx_per_slice must have 2 entries")
        if any(a <= 0 for a in self.semi_axes_zyx):
            raise ValueError(f"semi-axes must be > 0, got {self.semi_axes_zyx}")

    def slice_geometry(self, z: int) -> tuple[float, float, float, float] | None:
        """(center_y, center_x, semi_y, semi_x) of the cross-section at
        integer slice z, or None when the slice misses the ellipsoid."""
        cz, cy, cx = self.center_zyx
        az, ay, ax = self.semi_axes_zyx
        rest = 1.0 - ((z - cz) / az) ** 2
        if rest < 0.0:
            return None
        dy, dx = self.drift_yx_per_slice
        scale = math.sqrt(rest)
        return (cy + dy * (z - cz), cx + dx * (z - cz), ay * scale, ax * scale)


@dataclass(frozen=True)
class PhantomSpec:
    shape_zyx: tuple[int, int, int]
    background_hu: float = -800.0
    noise_sigma_hu: float = 0.0
    nodules: tuple[NoduleSpec, ...] = ()
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape_zyx", tuple(int(n) for n in self.shape_zyx))
        object.__setattr__(self, "nodules", tuple(self.nodules))
        if len(self.shape_zyx) != 3 or any(n < 1 for n in self.shape_zyx):
            raise ValueError(f"shape_zyx must be 3 positive ints, got {self.shape_zyx}")
        if self.noise_sigma_hu < 0:
            raise ValueError(f"noise_sigma_hu must be >= 0, got {self.noise_sigma_hu}")


def _check_bounds(spec: PhantomSpec, nodule: NoduleSpec) -> None:
    # Every ground-truth voxel center must land on the grid; a clipped
    # nodule would silently invalidate any oracle built on the phantom.
    nz, ny, nx = spec.shape_zyx
    cz = nodule.center_zyx[0]
    az = nodule.semi_axes_zyx[0]
    z_lo, z_hi = math.ceil(cz - az), math.floor(cz + az)
    if z_lo < 0 or z_hi > nz - 1:
        raise ValueError(
            f"nodule escapes bounds: slices {z_lo}..{z_hi} vs volume 0..{nz - 1}")
    for z in range(z_lo, z_hi + 1):
        geom = nodule.slice_geometry(z)
        if geom is None:
            continue
        gy, gx, sy, sx = geom
        if gy - sy < 0 or gy + sy > ny - 1 or gx - sx < 0 or gx + sx > nx - 1:
            raise ValueError(
                f"nodule escapes bounds at slice {z}: "
                f"y {gy - sy:.2f}..{gy + sy:.2f}, x {gx - sx:.2f}..{gx + sx:.2f} "
                f"vs extents ({ny}, {nx})")


def generate_phantom(spec: PhantomSpec) -> tuple[Volume3D, Mask3D]:
    """Render ``spec`` into a noisy int16 volume and its exact ground truth."""
    for nodule in spec.nodules:
        _check_bounds(spec, nodule)

    nz, ny, nx = spec.shape_zyx
    gt = np.zeros(spec.shape_zyx, dtype=np.uint8)
    hu = np.full(spec.shape_zyx, float(spec.background_hu), dtype=np.float64)
    yy, xx = np.ogrid[0:ny, 0:nx]

    for nodule in spec.nodules:
        cz, cy, cx = nodule.center_zyx
        az, ay, ax = nodule.semi_axes_zyx
        dy, dx = nodule.drift_yx_per_slice
        for z in range(nz):
            # Direct sum, no per-slice factoring: keeps boundary voxels
            # bit-consistent across axes so on-grid symmetry holds exactly.
            z_term = ((z - cz) / az) ** 2
            if z_term > 1.0:
                continue
            gy, gx = cy + dy * (z - cz), cx + dx * (z - cz)
            inside = z_term + ((yy - gy) / ay) ** 2 + ((xx - gx) / ax) ** 2 <= 1.0
            gt[z][inside] = 1
            hu[z][inside] += nodule.intensity_hu

    if spec.noise_sigma_hu > 0:
        rng = np.random.default_rng(spec.rng_seed)
        hu += rng.normal(0.0, spec.noise_sigma_hu, size=spec.shape_zyx)

    info = np.iinfo(np.int16)
    voxels = np.clip(np.rint(hu), info.min, info.max).astype(np.int16)
    return Volume3D(voxels), Mask3D(gt)


def phantom_spec_from_dict(d: dict) -> PhantomSpec:
    """Build a spec from parsed JSON; unknown keys are rejected."""
    known = {"shape_zyx", "background_hu", "noise_sigma_hu", "nodules", "rng_seed"}
    extra = set(d) - known
    if extra:
        raise ValueError(f"unknown phantom spec keys: {sorted(extra)}")
    nodule_known = {"center_zyx", "semi_axes_zyx", "intensity_hu", "drift_yx_per_slice"}
    nodules = []
    for nd in d.get("nodules", []):
        extra = set(nd) - nodule_known
        if extra:
            raise ValueError(f"unknown nodule keys: {sorted(extra)}")
        nodules.append(NoduleSpec(
            center_zyx=tuple(nd["center_zyx"]),
            semi_axes_zyx=tuple(nd["semi_axes_zyx"]),
            intensity_hu=float(nd.get("intensity_hu", 750.0)),
            drift_yx_per_slice=tuple(nd.get("drift_yx_per_slice", (0.0, 0.0)))))
    return PhantomSpec(
        shape_zyx=tuple(d["shape_zyx"]),
        background_hu=float(d.get("background_hu", -800.0)),
        noise_sigma_hu=float(d.get("noise_sigma_hu", 0.0)),
        nodules=tuple(nodules),
        rng_seed=int(d.get("rng_seed", 0)))


def load_phantom_spec(path: str | Path) -> PhantomSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return phantom_spec_from_dict(json.load(fh))
