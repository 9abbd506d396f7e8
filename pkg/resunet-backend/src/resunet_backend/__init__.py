"""Deep residual U-Net probability backend for the aroi-seg/1 protocol.

Two fully convolutional variants — a nine-level net for 128x128 axial
patches and a seven-level net for 128x64 coronal/sagittal patches — built
from pre-activation residual units, trained with plain SGD on a smoothed
Dice loss, and served over stdio to the segmentation engine.
"""

from .checkpoint import CHECKPOINT_FORMAT, load_checkpoint, save_checkpoint
from .config import LevelSpec, NetConfig, axial_config, view_config
from .data import (
    HU_WINDOW,
    MANIFEST_FORMAT,
    load_manifest,
    load_training_set,
    normalize_hu,
    read_rvol,
)
from .loss import dice_loss
from .model import ResidualUnit, ResUNet, build_model
from .serve import PROTO, serve_loop
from .train import TrainResult, evaluate_dsc, train

__all__ = [
    "CHECKPOINT_FORMAT",
    "HU_WINDOW",
    "MANIFEST_FORMAT",
    "PROTO",
    "LevelSpec",
    "NetConfig",
    "ResUNet",
    "ResidualUnit",
    "TrainResult",
    "axial_config",
    "build_model",
    "dice_loss",
    "evaluate_dsc",
    "load_checkpoint",
    "load_manifest",
    "load_training_set",
    "normalize_hu",
    "read_rvol",
    "save_checkpoint",
    "serve_loop",
    "train",
    "view_config",
]
