"""Stage II: re-segment the stage-I box from orthogonal views, then vote.

The stage-I walk produces an axial mask and its enclosing box (VOI). Stage
II slices that same fixed box along the coronal (per-y) and sagittal
(per-x) axes, segments every slice with a view-specific input size, and
fuses the three per-voxel votes: a voxel is nodule when its vote count g
satisfies ``g >= m * cr`` for m contributing views.

With the defaults (three views, cr = 0.5) that is a majority: at least two
views must agree. The same vote rule fuses multi-reader annotations into a
consensus ground truth, so it lives in one place here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .backends import SegmenterBackend, segment_patch
from .volume import (DEFAULT_HU_WINDOW, Mask3D, Patch2D, Roi2D, Voi3D,
                     Volume3D, extract_view_slices, normalize_hu, resize_patch)
from .walk import AroiConfig, Stage1Result, extract_voi, stage1_walk

BackendMap = Union[SegmenterBackend, Mapping[str, SegmenterBackend]]


@dataclass(frozen=True)
class ConsensusConfig:
    """Vote rule: voxel is nodule when votes >= number_of_views * cr."""

    cr: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.cr <= 1.0:
            raise ValueError(f"cr must be in (0, 1], got {self.cr}")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the two-stage pipeline needs besides volume and seed."""

    aroi: AroiConfig = field(default_factory=AroiConfig)
    fusion: ConsensusConfig = field(default_factory=ConsensusConfig)
    hu_window: tuple[float, float] = DEFAULT_HU_WINDOW
    voi_pad: int = 0

    def __post_init__(self) -> None:
        if self.voi_pad < 0:
            raise ValueError(f"voi_pad must be >= 0, got {self.voi_pad}")


@dataclass(frozen=True)
class ViewMask:
    """One view's binary vote over the whole VOI grid."""

    axis: str
    mask: Mask3D


def _fuse(votes: np.ndarray, m: int, cr: float) -> np.ndarray:
    """Per-voxel vote rule; ``votes`` counts agreeing sources per voxel."""
    return (votes >= m * cr).astype(np.uint8)


def consensus(views: Sequence[ViewMask], cfg: ConsensusConfig) -> Mask3D:
    """Fuse per-view VOI masks into one; all masks must share a shape."""
    if not views:
        raise ValueError("consensus needs at least one view mask")
    shape = views[0].mask.shape_zyx
    for v in views[1:]:
        if v.mask.shape_zyx != shape:
            raise ValueError(
                f"view {v.axis!r} mask shape {v.mask.shape_zyx} != {shape}")
    votes = np.zeros(shape, dtype=np.int32)
    for v in views:
        votes += v.mask.voxels.astype(np.int32)
    return Mask3D(_fuse(votes, len(views), cfg.cr))


def _backend_for(backends: BackendMap, view: str) -> SegmenterBackend:
    if isinstance(backends, SegmenterBackend):
        return backends
    try:
        return backends[view]
    except KeyError:
        raise ValueError(f"no backend registered for view {view!r}") from None


def stage2_view(vol: Volume3D, voi: Voi3D, axis: str, backend: SegmenterBackend,
                *, prob_threshold: float = 0.5,
                hu_window: tuple[float, float] = DEFAULT_HU_WINDOW) -> ViewMask:
    """Segment every slice of the fixed VOI along one orthogonal view.

    Unlike stage I the box never moves or grows; each slice is normalized,
    resized to the backend's input size for this view, segmented, binarized
    at ``prob_threshold``, and resized back (nearest) into the VOI grid.
    """
    if axis not in ("coronal", "sagittal"):
        raise ValueError(f"stage II runs on coronal/sagittal, got {axis!r}")
    vz, vy, vx = voi.shape_zyx
    w, h = backend.spec.input_sizes[axis]
    out = np.zeros((vz, vy, vx), dtype=np.uint8)
    for i, patch in enumerate(extract_view_slices(vol, voi, axis)):
        sw, sh = patch.width, patch.height
        probs = segment_patch(
            backend, axis,
            resize_patch(normalize_hu(patch, *hu_window), w, h, "bilinear"))
        binary = Patch2D((probs.pixels >= prob_threshold).astype(np.float64), "binary")
        native = resize_patch(binary, sw, sh, "nearest").pixels.astype(np.uint8)
        if axis == "coronal":
            out[:, i, :] = native
        else:
            out[:, :, i] = native
    return ViewMask(axis=axis, mask=Mask3D(out))


@dataclass(frozen=True)
class FinalResult:
    """Fused output plus every intermediate a caller might want to inspect."""

    mask: Mask3D
    stage1: Stage1Result
    voi: Voi3D | None
    view_masks: tuple[ViewMask, ...]

    @property
    def is_empty(self) -> bool:
        return self.voi is None


def segment_nodule(vol: Volume3D, seed: Roi2D, backends: BackendMap,
                   cfg: PipelineConfig | None = None) -> FinalResult:
    """Run the full two-stage pipeline from a seed ROI.

    An empty stage-I result (nothing found on the seed slice) short-circuits
    to an all-zero mask with no VOI; stage II never runs in that case.
    """
    cfg = cfg or PipelineConfig()
    stage1 = stage1_walk(vol, seed, _backend_for(backends, "axial"), cfg.aroi,
                         hu_window=cfg.hu_window)
    if stage1.is_empty:
        return FinalResult(mask=Mask3D.zeros(vol.shape_zyx), stage1=stage1,
                           voi=None, view_masks=())

    voi = extract_voi(stage1, cfg.voi_pad)
    axial_vote = ViewMask(
        axis="axial",
        mask=Mask3D(stage1.mask.voxels[voi.z1:voi.z2, voi.y1:voi.y2,
                                       voi.x1:voi.x2].copy()))
    votes = [axial_vote]
    for axis in ("coronal", "sagittal"):
        votes.append(stage2_view(vol, voi, axis, _backend_for(backends, axis),
                                 prob_threshold=cfg.aroi.prob_threshold,
                                 hu_window=cfg.hu_window))

    fused = consensus(votes, cfg.fusion)
    full = Mask3D.zeros(vol.shape_zyx)
    full.voxels[voi.z1:voi.z2, voi.y1:voi.y2, voi.x1:voi.x2] = fused.voxels
    return FinalResult(mask=full, stage1=stage1, voi=voi,
                       view_masks=tuple(votes))
