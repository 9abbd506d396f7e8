"""Training-set loading from rvol/1 files and an aroi-prep/1 manifest.

This module deliberately re-implements the two on-disk formats from their
byte-layout contracts rather than importing the segmentation engine — the
backend depends on the engine only through files and the stdio protocol.

* An ``<name>.rvol.json`` header holds ``{"magic": "rvol/1", "shape_zyx",
  "spacing_mm_zyx", "dtype": "i16le" | "u8", "data": "<name>.raw"}``; the
  raw file is little-endian, z-major (z slowest, x fastest).
* A ``manifest.json`` with ``format == "aroi-prep/1"`` lists image/mask
  header pairs plus per-sample metadata.

Images are Hounsfield units; the loader maps the window [-1000, 400]
affinely onto [0, 1] with clamping — the same normalization the engine
applies to the patches it sends over the wire, so training inputs and
serving inputs share one scale.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from torch.nn import functional as F

__all__ = [
    "HU_WINDOW",
    "MANIFEST_FORMAT",
    "load_manifest",
    "load_training_set",
    "normalize_hu",
    "read_rvol",
]

MANIFEST_FORMAT = "aroi-prep/1"
HU_WINDOW: tuple[float, float] = (-1000.0, 400.0)

_DTYPES = {"i16le": np.dtype("<i2"), "u8": np.dtype("u1")}


def read_rvol(header_path: str | Path) -> tuple[np.ndarray, tuple[float, ...]]:
    """Read one rvol/1 volume; returns ``(voxels_zyx, spacing_mm_zyx)``."""
    header_path = Path(header_path)
    with open(header_path, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("magic") != "rvol/1":
        raise ValueError(f"{header_path}: not an rvol/1 header")
    dtype = _DTYPES.get(header.get("dtype"))
    if dtype is None:
        raise ValueError(f"{header_path}: unsupported dtype {header.get('dtype')!r}")
    shape = tuple(int(n) for n in header["shape_zyx"])
    if len(shape) != 3 or any(n < 1 for n in shape):
        raise ValueError(f"{header_path}: bad shape_zyx {shape}")
    raw = (header_path.parent / header["data"]).read_bytes()
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(raw) != expected:
        raise ValueError(
            f"{header_path}: raw file holds {len(raw)} bytes, expected {expected}"
        )
    voxels = np.frombuffer(raw, dtype=dtype).reshape(shape)
    spacing = tuple(float(s) for s in header["spacing_mm_zyx"])
    return voxels, spacing


def normalize_hu(hu: np.ndarray) -> np.ndarray:
    """Affinely map the HU window [-1000, 400] to [0, 1], clamping outside."""
    lo, hi = HU_WINDOW
    return np.clip((hu.astype(np.float64) - lo) / (hi - lo), 0.0, 1.0)


def load_manifest(manifest_dir: str | Path) -> dict:
    """Read and validate ``manifest.json`` from a training-set directory."""
    path = Path(manifest_dir) / "manifest.json"
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ValueError(
            f"{path}: format is {manifest.get('format')!r}, expected {MANIFEST_FORMAT!r}"
        )
    return manifest


def load_training_set(
    manifest_dir: str | Path,
    input_hw: tuple[int, int] | None = None,
    limit: int | None = None,
) -> tuple[torch.Tensor, torch.Tensor, list[dict]]:
    """Load ``(images, masks, entries)`` from an aroi-prep/1 directory.

    Images come back as float32 ``(N, 1, H, W)`` tensors in [0, 1], masks as
    float32 ``(N, 1, H, W)`` tensors in {0, 1}.  When ``input_hw`` differs
    from the stored patch size, images are resized bilinearly and masks with
    nearest neighbour.  ``limit`` keeps only the first N samples.
    """
    manifest_dir = Path(manifest_dir)
    manifest = load_manifest(manifest_dir)
    entries = manifest["samples"][: limit if limit is not None else None]
    if not entries:
        raise ValueError(f"{manifest_dir}: manifest lists no samples")

    images, masks = [], []
    for entry in entries:
        img, _ = read_rvol(manifest_dir / entry["image"])
        msk, _ = read_rvol(manifest_dir / entry["mask"])
        if img.shape != msk.shape or img.shape[0] != 1:
            raise ValueError(
                f"sample {entry['image']}: image {img.shape} / mask {msk.shape} "
                "must be matching single-slice volumes"
            )
        images.append(normalize_hu(img[0]))
        masks.append((msk[0] != 0).astype(np.float32))

    x = torch.from_numpy(np.stack(images)[:, None, :, :]).float()
    y = torch.from_numpy(np.stack(masks)[:, None, :, :]).float()
    if input_hw is not None and tuple(x.shape[2:]) != tuple(input_hw):
        size = tuple(int(n) for n in input_hw)
        x = F.interpolate(x, size=size, mode="bilinear", align_corners=False)
        y = F.interpolate(y, size=size, mode="nearest")
    return x, y, list(entries)
