"""Voxel-overlap scores between a predicted mask and a reference mask.

Conventions for degenerate masks, applied identically by every score so
empty-vs-empty comparisons are stable: two empty masks agree perfectly
(score 1.0); one empty and one not is total disagreement (score 0.0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _as_bool(mask) -> np.ndarray:
    return np.asarray(getattr(mask, "voxels", mask)) != 0


def overlap_counts(pred, ref) -> tuple[int, int, int]:
    """(tp, pred_count, ref_count): intersection and per-mask voxel counts."""
    p, r = _as_bool(pred), _as_bool(ref)
    if p.shape != r.shape:
        raise ValueError(f"mask shapes differ: {p.shape} vs {r.shape}")
    return (int(np.count_nonzero(p & r)), int(np.count_nonzero(p)),
            int(np.count_nonzero(r)))


def _degenerate(tp: int, pred_count: int, ref_count: int) -> float | None:
    if pred_count == 0 and ref_count == 0:
        return 1.0
    if pred_count == 0 or ref_count == 0:
        return 0.0
    return None


@dataclass(frozen=True)
class OverlapReport:
    """All three scores plus the exact integer counts they came from."""

    dsc: float
    sen: float
    ppv: float
    tp: int
    pred_count: int
    ref_count: int

    def as_dict(self) -> dict:
        return {"dsc": self.dsc, "sen": self.sen, "ppv": self.ppv,
                "tp": self.tp, "pred_count": self.pred_count,
                "ref_count": self.ref_count}


def overlap(pred, ref) -> OverlapReport:
    """Exact overlap counts and the scores derived from them."""
    tp, pc, rc = overlap_counts(pred, ref)
    special = _degenerate(tp, pc, rc)
    if special is not None:
        return OverlapReport(dsc=special, sen=special, ppv=special,
                             tp=tp, pred_count=pc, ref_count=rc)
    return OverlapReport(dsc=2.0 * tp / (pc + rc), sen=tp / rc, ppv=tp / pc,
                         tp=tp, pred_count=pc, ref_count=rc)


def dsc(pred, ref) -> float:
    """Dice similarity: 2 * |pred & ref| / (|pred| + |ref|)."""
    return overlap(pred, ref).dsc


def sen(pred, ref) -> float:
    """Sensitivity (recall): |pred & ref| / |ref|."""
    return overlap(pred, ref).sen


def ppv(pred, ref) -> float:
    """Positive predictive value (precision): |pred & ref| / |pred|."""
    return overlap(pred, ref).ppv
