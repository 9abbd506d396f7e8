"""Network configurations for the two deep residual U-Net variants.

The backend ships exactly two architectures:

* the **axial** net, consuming 128x128 patches through nine levels with a
  1024-channel bridge, and
* the **coronal-sagittal** net, consuming 128x64 patches (64 rows of 128
  pixels on the wire) through seven levels with a 512-channel bridge.

``NetConfig`` pins each variant's per-level filter counts and strides; the
constructor rejects anything that deviates from the shipped tables so a
checkpoint's embedded config is always one of the two known shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["LevelSpec", "NetConfig", "axial_config", "view_config"]


@dataclass(frozen=True)
class LevelSpec:
    """One resolution level: its filter count and its first conv's stride.

    Every level runs two 3x3 convolutions with ``filters`` output channels;
    ``first_stride`` is the stride of the first of the pair (2 on encoder
    levels that downsample, 1 everywhere else).
    """

    filters: int
    first_stride: int


# (filters, first_stride) per level, top to bottom of each table.
_AXIAL_LEVELS: tuple[tuple[int, int], ...] = (
    (64, 1),
    (128, 2),
    (256, 2),
    (512, 2),
    (1024, 2),
    (512, 1),
    (256, 1),
    (128, 1),
    (64, 1),
)

_VIEW_LEVELS: tuple[tuple[int, int], ...] = (
    (64, 1),
    (128, 2),
    (256, 2),
    (512, 2),
    (256, 1),
    (128, 1),
    (64, 1),
)

# Wire frames are row-major (h rows of w pixels); models consume (h, w).
_AXIAL_HW = (128, 128)
_VIEW_HW = (64, 128)

_CANONICAL = {
    "axial": (_AXIAL_LEVELS, _AXIAL_HW),
    "coronal-sagittal": (_VIEW_LEVELS, _VIEW_HW),
}


def _canonical_levels(view: str) -> tuple[LevelSpec, ...]:
    levels, _ = _CANONICAL[view]
    return tuple(LevelSpec(f, s) for f, s in levels)


@dataclass(frozen=True)
class NetConfig:
    """Complete recipe for one U-Net variant plus its training defaults.

    ``view`` selects the variant ("axial" or "coronal-sagittal"); ``levels``
    and ``input_hw`` must match that variant's shipped table exactly.
    """

    view: str
    levels: tuple[LevelSpec, ...] = field(default=())
    input_hw: tuple[int, int] = (0, 0)
    learning_rate: float = 1e-4
    batch_size: int = 8

    def __post_init__(self) -> None:
        if self.view not in _CANONICAL:
            raise ValueError(
                f"view must be one of {sorted(_CANONICAL)}, got {self.view!r}"
            )
        want_levels, want_hw = _CANONICAL[self.view]
        want = tuple(LevelSpec(f, s) for f, s in want_levels)
        levels = self.levels if self.levels else want
        hw = self.input_hw if self.input_hw != (0, 0) else want_hw
        if levels != want:
            raise ValueError(f"levels do not match the {self.view} table")
        if tuple(hw) != want_hw:
            raise ValueError(
                f"input_hw must be {want_hw} for view {self.view!r}, got {hw}"
            )
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "input_hw", tuple(hw))
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.batch_size >= 1:
            raise ValueError("batch_size must be at least 1")

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def bridge_index(self) -> int:
        """Index of the bottom level (the bridge) in ``levels``."""
        return len(self.levels) // 2

    def to_dict(self) -> dict:
        return {
            "view": self.view,
            "levels": [[l.filters, l.first_stride] for l in self.levels],
            "input_hw": list(self.input_hw),
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetConfig":
        return cls(
            view=d["view"],
            levels=tuple(LevelSpec(int(f), int(s)) for f, s in d["levels"]),
            input_hw=tuple(d["input_hw"]),
            learning_rate=float(d["learning_rate"]),
            batch_size=int(d["batch_size"]),
        )


def axial_config() -> NetConfig:
    """Nine-level net for 128x128 axial patches (1024-channel bridge)."""
    return NetConfig(view="axial")


def view_config() -> NetConfig:
    """Seven-level net for 128x64 coronal/sagittal patches (512-channel bridge)."""
    return NetConfig(view="coronal-sagittal")
