"""Training-data preparation: random-margin ROI sampling around ground truth.

Slice segmenters train on square crops somewhat larger than the nodule, so
the network sees the lesion at varying offsets and scales. For each
nodule-bearing slice the crop is the ground-truth bounding box expanded by
four independently drawn margins, each a uniform integer in [0, round(f)]
with f = D_max * rt (D_max being the longer bounding-box side), then squared
and clamped into the image by translation. The box always contains the
nodule. Slices just beyond the nodule's z-extent contribute nodule-free
samples with empty masks, reusing the adjacent slice's crop geometry.

Multi-reader annotations reduce to a single ground truth by the same vote
rule the pipeline uses for view fusion (majority at cr = 0.5).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import rvol
from .multiview import ConsensusConfig, ViewMask, consensus
from .volume import Mask3D, Patch2D, Roi2D, Volume3D, crop_axial, resize_patch

#: Side length of every training image and mask.
TRAIN_SIZE = 128

MANIFEST_FORMAT = "aroi-prep/1"
MANIFEST_NAME = "manifest.json"


def consensus_ground_truth(annotations: Sequence[Mask3D],
                           cr: float = 0.5) -> Mask3D:
    """Fuse reader annotations by per-voxel vote: keep voxels with
    votes >= n_readers * cr. Single shared vote rule with view fusion."""
    views = [ViewMask(axis=f"reader{i}", mask=m) for i, m in enumerate(annotations)]
    return consensus(views, ConsensusConfig(cr=cr))


@dataclass(frozen=True)
class SampleMeta:
    z: int
    roi: Roi2D
    has_nodule: bool


@dataclass(frozen=True)
class TrainingSample:
    """One (image, mask) training pair, both exactly 128 x 128."""

    image: Patch2D
    mask: Patch2D
    meta: SampleMeta

    def __post_init__(self) -> None:
        for name, p in (("image", self.image), ("mask", self.mask)):
            if (p.width, p.height) != (TRAIN_SIZE, TRAIN_SIZE):
                raise ValueError(
                    f"{name} must be {TRAIN_SIZE}x{TRAIN_SIZE}, "
                    f"got {(p.width, p.height)}")
        if bool(self.mask.pixels.any()) != self.meta.has_nodule:
            raise ValueError("mask emptiness contradicts the nodule-present flag")


def random_margin_roi(gt_slice: np.ndarray, rt: float, rng: np.random.Generator,
                      *, z: int = 0) -> Roi2D:
    """Square crop around the slice's ground truth with random margins.

    Margins are drawn left, right, top, bottom, each uniform on the
    integers [0, round(D_max * rt)]. The rectangle is squared by extending
    its shorter dimension on the high side, then translated (never shrunk)
    to fit the image, so the nodule's bounding box stays inside.
    """
    gt_slice = np.asarray(gt_slice)
    rows = np.flatnonzero(gt_slice.any(axis=1))
    cols = np.flatnonzero(gt_slice.any(axis=0))
    if rows.size == 0:
        raise ValueError("ground-truth slice is empty; no box to sample around")
    img_h, img_w = gt_slice.shape

    bw = int(cols[-1] - cols[0] + 1)
    bh = int(rows[-1] - rows[0] + 1)
    d_max = max(bw, bh)
    hi = int(round(d_max * rt))
    ml, mr, mt, mb = (int(rng.integers(0, hi + 1)) for _ in range(4))

    x1, x2 = int(cols[0]) - ml, int(cols[-1]) + 1 + mr
    y1, y2 = int(rows[0]) - mt, int(rows[-1]) + 1 + mb
    w, h = x2 - x1, y2 - y1
    if w < h:
        x2 += h - w
    elif h < w:
        y2 += w - h

    side = x2 - x1
    if side > img_w or side > img_h:
        raise ValueError(f"crop side {side} exceeds slice extent {(img_w, img_h)}")
    dx = max(0, -x1) - max(0, x2 - img_w)
    dy = max(0, -y1) - max(0, y2 - img_h)
    return Roi2D(x1=x1 + dx, x2=x2 + dx, y1=y1 + dy, y2=y2 + dy, z=z)


def _make_sample(vol: Volume3D, gt: Mask3D, roi: Roi2D,
                 has_nodule: bool) -> TrainingSample:
    image = resize_patch(crop_axial(vol, roi), TRAIN_SIZE, TRAIN_SIZE, "bilinear")
    mask_px = gt.voxels[roi.z, roi.y1:roi.y2, roi.x1:roi.x2].astype(np.float64)
    mask = resize_patch(Patch2D(mask_px, "binary"), TRAIN_SIZE, TRAIN_SIZE, "nearest")
    return TrainingSample(image=image, mask=mask,
                          meta=SampleMeta(z=roi.z, roi=roi, has_nodule=has_nodule))


def extract_training_set(vol: Volume3D, gt: Mask3D, rt: float,
                         rng: np.random.Generator,
                         empty_per_side: int = 1) -> list[TrainingSample]:
    """One positive sample per nodule-bearing slice plus nodule-free
    samples from the slices just beyond each z-extremity.

    Beyond-extremity samples reuse the extreme slice's crop geometry and
    are skipped where the volume ends. Output is ordered by slice index.
    """
    if vol.shape_zyx != gt.shape_zyx:
        raise ValueError(
            f"volume shape {vol.shape_zyx} != ground truth {gt.shape_zyx}")
    if empty_per_side < 0:
        raise ValueError(f"empty_per_side must be >= 0, got {empty_per_side}")
    nodule_slices = [int(z) for z in np.flatnonzero(
        gt.voxels.any(axis=(1, 2)))]
    if not nodule_slices:
        raise ValueError("ground truth is empty; nothing to extract")

    samples = []
    rois: dict[int, Roi2D] = {}
    for z in nodule_slices:
        roi = random_margin_roi(gt.voxels[z], rt, rng, z=z)
        rois[z] = roi
        samples.append(_make_sample(vol, gt, roi, has_nodule=True))

    nz = vol.shape_zyx[0]
    z_lo, z_hi = nodule_slices[0], nodule_slices[-1]
    for base, direction in ((z_lo, -1), (z_hi, +1)):
        for k in range(1, empty_per_side + 1):
            z = base + direction * k
            if not 0 <= z < nz:
                break
            roi = Roi2D(x1=rois[base].x1, x2=rois[base].x2,
                        y1=rois[base].y1, y2=rois[base].y2, z=z)
            samples.append(_make_sample(vol, gt, roi, has_nodule=False))

    samples.sort(key=lambda s: s.meta.z)
    return samples


def write_training_set(samples: Sequence[TrainingSample], out_dir: str | Path,
                       *, rt: float, seed: int) -> dict:
    """Write samples as image/mask file pairs plus a manifest JSON.

    Images are stored as signed 16-bit volumes of shape (1, 128, 128)
    (values rounded to the nearest integer), masks as binary volumes of the
    same shape. Returns the manifest that was written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, s in enumerate(samples):
        img_name = f"sample_{i:04d}_img"
        msk_name = f"sample_{i:04d}_msk"
        info = np.iinfo(np.int16)
        img_vox = np.clip(np.rint(s.image.pixels), info.min, info.max)
        rvol.save_volume(Volume3D(img_vox[np.newaxis, :, :].astype(np.int16)),
                         out / img_name)
        rvol.save_mask(Mask3D(s.mask.pixels[np.newaxis, :, :].astype(np.uint8)),
                       out / msk_name)
        entries.append({
            "image": img_name + rvol.HEADER_SUFFIX,
            "mask": msk_name + rvol.HEADER_SUFFIX,
            "z": s.meta.z,
            "roi": {"x1": s.meta.roi.x1, "x2": s.meta.roi.x2,
                    "y1": s.meta.roi.y1, "y2": s.meta.roi.y2},
            "has_nodule": s.meta.has_nodule,
        })
    manifest = {
        "format": MANIFEST_FORMAT,
        "rt": rt,
        "seed": seed,
        "size": TRAIN_SIZE,
        "count": len(entries),
        "samples": entries,
    }
    with open(out / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
