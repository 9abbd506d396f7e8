"""Bit-exact flat-file volume storage (the "rvol" format).

A stored array is a pair of files: ``<name>.rvol.json`` (UTF-8 JSON header)
and a raw payload named by the header's ``data`` field, holding exactly
Z*Y*X little-endian elements, z-major then y then x, no header, no padding.
Intensity volumes use dtype ``i16le``; masks use ``u8`` with values {0, 1}.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .volume import Mask3D, Volume3D

MAGIC = "rvol/1"
HEADER_SUFFIX = ".rvol.json"


class RvolError(Exception):
    """A file pair does not conform to the rvol format."""


class RvolMagicError(RvolError):
    """The header magic is missing or not 'rvol/1'."""


class RvolLengthError(RvolError):
    """The raw payload byte length disagrees with the header shape."""


def _header_path(path: str | Path) -> Path:
    p = Path(path)
    if not p.name.endswith(HEADER_SUFFIX):
        p = p.with_name(p.name + HEADER_SUFFIX)
    return p


def _write(path: str | Path, arr: np.ndarray, dtype: str, spacing: tuple[float, float, float]) -> None:
    header_path = _header_path(path)
    raw_name = header_path.name[: -len(HEADER_SUFFIX)] + ".raw"
    header = {
        "magic": MAGIC,
        "shape_zyx": [int(n) for n in arr.shape],
        "spacing_mm_zyx": [float(s) for s in spacing],
        "dtype": dtype,
        "data": raw_name,
    }
    header_path.parent.mkdir(parents=True, exist_ok=True)
    header_path.write_text(json.dumps(header), encoding="utf-8")
    (header_path.parent / raw_name).write_bytes(arr.tobytes())


def _read(path: str | Path, expected_dtype: str) -> tuple[np.ndarray, tuple[float, float, float]]:
    header_path = _header_path(path)
    try:
        header = json.loads(header_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RvolError(f"{header_path}: header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise RvolMagicError(f"{header_path}: bad magic {header.get('magic')!r}" if isinstance(header, dict)
                             else f"{header_path}: header is not a JSON object")
    if header.get("dtype") != expected_dtype:
        raise RvolError(f"{header_path}: expected dtype {expected_dtype!r}, got {header.get('dtype')!r}")
    shape = header.get("shape_zyx")
    if (not isinstance(shape, list) or len(shape) != 3
            or not all(isinstance(n, int) and n > 0 for n in shape)):
        raise RvolError(f"{header_path}: bad shape_zyx {shape!r}")
    spacing = header.get("spacing_mm_zyx")
    if (not isinstance(spacing, list) or len(spacing) != 3
            or not all(isinstance(s, (int, float)) and s > 0 for s in spacing)):
        raise RvolError(f"{header_path}: bad spacing_mm_zyx {spacing!r}")
    raw_name = header.get("data")
    if not isinstance(raw_name, str):
        raise RvolError(f"{header_path}: bad data filename {raw_name!r}")
    raw = (header_path.parent / raw_name).read_bytes()
    np_dtype = np.dtype("<i2") if expected_dtype == "i16le" else np.dtype("u1")
    expected_bytes = shape[0] * shape[1] * shape[2] * np_dtype.itemsize
    if len(raw) != expected_bytes:
        raise RvolLengthError(
            f"{header_path}: raw payload is {len(raw)} bytes, header implies {expected_bytes}")
    arr = np.frombuffer(raw, dtype=np_dtype).reshape(shape)
    return arr.astype(np_dtype.newbyteorder("=")), (spacing[0], spacing[1], spacing[2])


def save_volume(vol: Volume3D, path: str | Path) -> None:
    _write(path, vol.voxels.astype("<i2", copy=False), "i16le", vol.spacing_mm_zyx)


def load_volume(path: str | Path) -> Volume3D:
    arr, spacing = _read(path, "i16le")
    return Volume3D(arr.astype(np.int16, copy=False), spacing)


def save_mask(mask: Mask3D, path: str | Path,
              spacing_mm_zyx: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> None:
    _write(path, mask.voxels.astype("u1", copy=False), "u8", spacing_mm_zyx)


def load_mask(path: str | Path) -> Mask3D:
    arr, _ = _read(path, "u8")
    if arr.max(initial=0) > 1:
        raise RvolError(f"{_header_path(path)}: mask payload has values outside {{0, 1}}")
    return Mask3D(arr.astype(np.uint8, copy=False))
