"""Smoothed soft-Dice training loss."""

from __future__ import annotations

import torch

__all__ = ["dice_loss"]


def dice_loss(
    pred: torch.Tensor, target: torch.Tensor, eps: float = 1.0
) -> torch.Tensor:
    """Mean over the batch of ``1 - (2*sum(p*t) + eps) / (sum(p) + sum(t) + eps)``.

    ``pred`` and ``target`` must share a shape whose first axis is the batch;
    sums run over everything but that axis.  With values in [0, 1] the result
    lies in [0, 1] (0 for a perfect binary match) and is symmetric in its two
    arguments.  The ``eps`` smoothing term appears in both the numerator and
    the denominator, which keeps the empty-vs-empty case at zero loss and the
    loss differentiable everywhere.
    """
    if pred.shape != target.shape:
        raise ValueError(
            f"pred shape {tuple(pred.shape)} != target shape {tuple(target.shape)}"
        )
    if pred.ndim < 2:
        raise ValueError("expected at least a (batch, ...) tensor")
    dims = tuple(range(1, pred.ndim))
    inter = (pred * target).sum(dim=dims)
    total = pred.sum(dim=dims) + target.sum(dim=dims)
    return (1.0 - (2.0 * inter + eps) / (total + eps)).mean()
