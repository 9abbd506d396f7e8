"""Independent reference implementations used to cross-check the package.

Everything here is written the slow, obvious way (explicit Python loops,
breadth-first search) on purpose: these functions must not share code or
vectorization tricks with the implementations they verify.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np


def bbox_scan(mask: np.ndarray) -> tuple[int, int, int, int] | None:
    """(rmin, rmax, cmin, cmax) of nonzero pixels by exhaustive scan."""
    rmin = cmin = None
    rmax = cmax = -1
    h, w = mask.shape
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                if rmin is None:
                    rmin = r
                rmax = r
                if cmin is None or c < cmin:
                    cmin = c
                if c > cmax:
                    cmax = c
    if rmin is None:
        return None
    return rmin, rmax, cmin, cmax


def bbox3_scan(mask: np.ndarray) -> tuple[int, int, int, int, int, int] | None:
    """(zmin, zmax, ymin, ymax, xmin, xmax) of nonzero voxels, by loops."""
    lo = [None, None, None]
    hi = [-1, -1, -1]
    nz, ny, nx = mask.shape
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                if mask[z, y, x]:
                    for axis, v in enumerate((z, y, x)):
                        if lo[axis] is None or v < lo[axis]:
                            lo[axis] = v
                        if v > hi[axis]:
                            hi[axis] = v
    if lo[0] is None:
        return None
    return lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]


def bfs_components(binary: np.ndarray) -> list[set[tuple[int, int]]]:
    """4-connected components by BFS, ordered by row-major first discovery."""
    h, w = binary.shape
    seen = np.zeros((h, w), dtype=bool)
    comps: list[set[tuple[int, int]]] = []
    for r in range(h):
        for c in range(w):
            if not binary[r, c] or seen[r, c]:
                continue
            comp = set()
            queue = deque([(r, c)])
            seen[r, c] = True
            while queue:
                cr, cc = queue.popleft()
                comp.add((cr, cc))
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    nr, nc = cr + dr, cc + dc
                    if 0 <= nr < h and 0 <= nc < w and binary[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        queue.append((nr, nc))
            comps.append(comp)
    return comps


def largest_component_first_discovered(binary: np.ndarray) -> set[tuple[int, int]]:
    """The winning component under the size-then-discovery-order rule."""
    comps = bfs_components(binary)
    if not comps:
        return set()
    best = comps[0]
    for comp in comps[1:]:
        if len(comp) > len(best):
            best = comp
    return best


def _src_coord(i: int, dst: int, src: int) -> float:
    t = (i + 0.5) * src / dst - 0.5
    return min(max(t, 0.0), float(src - 1))


def resize_nearest_ref(a: np.ndarray, tw: int, th: int) -> np.ndarray:
    sh, sw = a.shape
    out = np.empty((th, tw), dtype=a.dtype)
    for r in range(th):
        sr = math.floor(_src_coord(r, th, sh) + 0.5)
        for c in range(tw):
            sc = math.floor(_src_coord(c, tw, sw) + 0.5)
            out[r, c] = a[sr, sc]
    return out


def resize_bilinear_ref(a: np.ndarray, tw: int, th: int) -> np.ndarray:
    sh, sw = a.shape
    out = np.empty((th, tw), dtype=np.float64)
    for r in range(th):
        fr = _src_coord(r, th, sh)
        r0 = math.floor(fr)
        r1 = min(r0 + 1, sh - 1)
        wr = fr - r0
        for c in range(tw):
            fc = _src_coord(c, tw, sw)
            c0 = math.floor(fc)
            c1 = min(c0 + 1, sw - 1)
            wc = fc - c0
            top = a[r0, c0] * (1 - wc) + a[r0, c1] * wc
            bot = a[r1, c0] * (1 - wc) + a[r1, c1] * wc
            out[r, c] = top * (1 - wr) + bot * wr
    return out


def disk_mask(h: int, w: int, cy: float, cx: float, radius: float) -> np.ndarray:
    """Pixel-center rasterization of a disk, by loops."""
    out = np.zeros((h, w), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            if (r - cy) ** 2 + (c - cx) ** 2 <= radius ** 2:
                out[r, c] = 1
    return out


def ellipsoid_mask(shape_zyx, center_zyx, semi_axes_zyx,
                   drift_yx=(0.0, 0.0)) -> np.ndarray:
    """Voxel-center rasterization of a (drifting) ellipsoid, by loops."""
    nz, ny, nx = shape_zyx
    cz, cy, cx = center_zyx
    az, ay, ax = semi_axes_zyx
    dy, dx = drift_yx
    out = np.zeros(shape_zyx, dtype=np.uint8)
    for z in range(nz):
        cyz = cy + dy * (z - cz)
        cxz = cx + dx * (z - cz)
        for y in range(ny):
            for x in range(nx):
                q = (((z - cz) / az) ** 2 + ((y - cyz) / ay) ** 2
                     + ((x - cxz) / ax) ** 2)
                if q <= 1.0:
                    out[z, y, x] = 1
    return out


def margins_scan(m: np.ndarray, side: int) -> tuple[int, int, int, int]:
    """(dl, dr, dt, db) from the exhaustive bounding-box scan."""
    box = bbox_scan(m)
    assert box is not None, "margins oracle needs a non-empty mask"
    rmin, rmax, cmin, cmax = box
    return cmin, side - (cmax + 1), rmin, side - (rmax + 1)


def majority_vote(patterns: tuple[int, ...], cr: float) -> int:
    """Direct vote-rule evaluation for one voxel."""
    return 1 if sum(patterns) >= len(patterns) * cr else 0
