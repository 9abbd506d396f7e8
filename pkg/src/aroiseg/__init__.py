"""Seeded two-stage 3-D lung-nodule segmentation.

From a single user-drawn square ROI on one axial slice, stage I walks the
ROI up and down the stack, re-centering and growing it as the nodule
drifts or swells, and accumulates an axial mask. Stage II re-segments the
resulting box from the coronal and sagittal views and fuses the three
votes per voxel. Slice segmenters are pluggable: a classical threshold
reference ships in-process, and trained models attach as child processes
over a simple stdin/stdout protocol.
"""

from .backends import (REFERENCE_INPUT_SIZES, BackendError, ConstantBackend,
                       ExternalBackend, FunctionBackend, HandshakeError,
                       HandshakeTimeoutError, ProtocolError, SegmenterBackend,
                       SegmenterSpec, ThresholdBackend, segment_patch,
                       spawn_external, threshold_reference)
from .dataprep import (MANIFEST_FORMAT, MANIFEST_NAME, TRAIN_SIZE, SampleMeta,
                       TrainingSample, consensus_ground_truth,
                       extract_training_set, random_margin_roi,
                       write_training_set)
from .metrics import OverlapReport, dsc, overlap, overlap_counts, ppv, sen
from .multiview import (ConsensusConfig, FinalResult, PipelineConfig, ViewMask,
                        consensus, segment_nodule, stage2_view)
from .phantom import (NoduleSpec, PhantomSpec, generate_phantom,
                      load_phantom_spec, phantom_spec_from_dict)
from .rvol import (RvolError, RvolLengthError, RvolMagicError, load_mask,
                   load_volume, save_mask, save_volume)
from .volume import (DEFAULT_HU_WINDOW, Mask3D, Patch2D, Roi2D, Voi3D,
                     Volume3D, crop_axial, embed_slice_mask,
                     extract_view_slices, normalize_hu, resize_patch)
from .walk import (AroiConfig, Margins, Stage1Result, extract_voi,
                   mask_margins, segment_slice, stage1_walk, update_roi)

__version__ = "0.1.0"

__all__ = [
    "AroiConfig", "BackendError", "ConsensusConfig", "ConstantBackend",
    "DEFAULT_HU_WINDOW", "ExternalBackend", "FinalResult", "FunctionBackend",
    "HandshakeError", "HandshakeTimeoutError", "MANIFEST_FORMAT",
    "MANIFEST_NAME", "Margins", "Mask3D",
    "NoduleSpec", "Patch2D", "PhantomSpec", "PipelineConfig", "ProtocolError",
    "REFERENCE_INPUT_SIZES", "Roi2D", "RvolError", "RvolLengthError",
    "RvolMagicError", "OverlapReport", "SampleMeta", "SegmenterBackend",
    "SegmenterSpec", "Stage1Result", "TRAIN_SIZE", "ThresholdBackend",
    "TrainingSample", "ViewMask", "Voi3D", "Volume3D", "consensus",
    "consensus_ground_truth", "crop_axial", "dsc", "embed_slice_mask",
    "extract_training_set", "extract_view_slices", "extract_voi",
    "generate_phantom", "load_mask", "load_phantom_spec", "load_volume",
    "mask_margins", "normalize_hu", "overlap", "overlap_counts",
    "phantom_spec_from_dict",
    "ppv", "random_margin_roi", "resize_patch", "save_mask", "save_volume",
    "segment_nodule", "segment_patch", "segment_slice", "sen",
    "spawn_external", "stage1_walk", "stage2_view", "threshold_reference",
    "update_roi", "write_training_set",
]
