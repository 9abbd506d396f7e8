"""Training loop: plain SGD on the smoothed Dice loss.

``train`` reads an aroi-prep/1 manifest, fits the configured net, writes a
checkpoint, and returns the full loss history.  Optimization is plain
stochastic gradient descent (no momentum) at the config's learning rate
unless overridden; batches follow the config's batch size with a seeded
shuffle each epoch, so a given ``(seed, data)`` pair reproduces its loss
history exactly on a fixed thread count.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .checkpoint import save_checkpoint
from .config import NetConfig, axial_config, view_config
from .data import load_training_set
from .loss import dice_loss
from .model import ResUNet, build_model

__all__ = ["TrainResult", "evaluate_dsc", "train", "entry"]


@dataclass
class TrainResult:
    checkpoint_path: Path
    epochs_run: int
    loss_history: list[float] = field(default_factory=list)
    dsc_history: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1]


def evaluate_dsc(
    model: ResUNet, x: torch.Tensor, y: torch.Tensor, batch_size: int = 8
) -> float:
    """Global Dice score of thresholded predictions (>= 0.5) against masks.

    Counts are pooled over the whole set, so empty-mask samples simply
    contribute nothing to either total; an entirely empty set scores 1.0.
    """
    was_training = model.training
    model.eval()
    inter = total = 0.0
    with torch.no_grad():
        for i in range(0, x.shape[0], batch_size):
            pred = (model(x[i : i + batch_size]) >= 0.5).float()
            ref = y[i : i + batch_size]
            inter += float((pred * ref).sum())
            total += float(pred.sum() + ref.sum())
    if was_training:
        model.train()
    return 1.0 if total == 0 else 2.0 * inter / total


def train(
    cfg: NetConfig,
    manifest_dir: str | Path,
    epochs: int,
    seed: int,
    out_path: str | Path,
    *,
    learning_rate: float | None = None,
    limit: int | None = None,
    stop_dsc: float | None = None,
    track_dsc: bool = False,
) -> TrainResult:
    """Fit ``cfg``'s net on the manifest's samples and write a checkpoint.

    ``learning_rate`` overrides the config default; ``limit`` keeps only the
    first N samples; ``stop_dsc`` ends training early once the thresholded
    train-set Dice exceeds it (checked after each epoch).  Returns the
    checkpoint path, the per-epoch mean loss history, and — when ``stop_dsc``
    or ``track_dsc`` is set — the matching per-epoch Dice history.
    """
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    x, y, _ = load_training_set(manifest_dir, input_hw=cfg.input_hw, limit=limit)

    torch.manual_seed(seed)
    model = build_model(cfg)
    model.train()
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    opt = torch.optim.SGD(model.parameters(), lr=lr)
    shuffler = torch.Generator().manual_seed(seed)

    n = x.shape[0]
    loss_history: list[float] = []
    dsc_history: list[float] = []
    epochs_run = 0
    for _ in range(epochs):
        order = torch.randperm(n, generator=shuffler)
        epoch_loss = 0.0
        for i in range(0, n, cfg.batch_size):
            idx = order[i : i + cfg.batch_size]
            opt.zero_grad()
            loss = dice_loss(model(x[idx]), y[idx])
            loss.backward()
            opt.step()
            epoch_loss += float(loss.detach()) * len(idx)
        loss_history.append(epoch_loss / n)
        epochs_run += 1
        if stop_dsc is not None or track_dsc:
            dsc = evaluate_dsc(model, x, y, cfg.batch_size)
            dsc_history.append(dsc)
            if stop_dsc is not None and dsc > stop_dsc:
                break

    model.eval()
    out_path = Path(out_path)
    save_checkpoint(
        out_path,
        model,
        cfg,
        seed=seed,
        epochs_run=epochs_run,
        loss_history=loss_history,
    )
    return TrainResult(
        checkpoint_path=out_path,
        epochs_run=epochs_run,
        loss_history=loss_history,
        dsc_history=dsc_history,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resunet-train",
        description="Train a residual U-Net on an aroi-prep/1 training set.",
    )
    parser.add_argument("--view", choices=["axial", "coronal-sagittal"],
                        required=True, help="which net variant to train")
    parser.add_argument("--manifest", required=True,
                        help="directory containing manifest.json")
    parser.add_argument("--out", required=True, help="checkpoint output path")
    parser.add_argument("--epochs", type=int, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lr", type=float, default=None,
                        help="override the config learning rate")
    parser.add_argument("--limit", type=int, default=None,
                        help="train on only the first N samples")
    parser.add_argument("--stop-dsc", type=float, default=None,
                        help="stop early once train Dice exceeds this")
    return parser


def entry(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = axial_config() if args.view == "axial" else view_config()
    try:
        result = train(
            cfg, args.manifest, args.epochs, args.seed, args.out,
            learning_rate=args.lr, limit=args.limit, stop_dsc=args.stop_dsc,
        )
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    last_dsc = f", dice {result.dsc_history[-1]:.4f}" if result.dsc_history else ""
    print(
        f"wrote {result.checkpoint_path} after {result.epochs_run} epochs "
        f"(final loss {result.final_loss:.6f}{last_dsc})"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(entry())
