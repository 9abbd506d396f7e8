"""Checkpoint serialization: model weights plus their NetConfig."""

from __future__ import annotations

from pathlib import Path

import torch

from .config import NetConfig
from .model import ResUNet, build_model

__all__ = ["CHECKPOINT_FORMAT", "save_checkpoint", "load_checkpoint"]

CHECKPOINT_FORMAT = "resunet-ckpt/1"


def save_checkpoint(
    path: str | Path, model: ResUNet, cfg: NetConfig, **extra
) -> None:
    """Write model weights and config (plus optional metadata) to ``path``."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "config": cfg.to_dict(),
        "state_dict": model.state_dict(),
    }
    overlap = payload.keys() & extra.keys()
    if overlap:
        raise ValueError(f"reserved checkpoint keys: {sorted(overlap)}")
    payload.update(extra)
    torch.save(payload, str(path))


def load_checkpoint(path: str | Path) -> tuple[ResUNet, NetConfig, dict]:
    """Load ``path``; returns ``(model_in_eval_mode, cfg, metadata)``."""
    payload = torch.load(str(path), map_location="cpu", weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
    cfg = NetConfig.from_dict(payload["config"])
    model = build_model(cfg)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    meta = {k: v for k, v in payload.items()
            if k not in ("format", "config", "state_dict")}
    return model, cfg, meta
