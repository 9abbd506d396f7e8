"""Deep residual U-Net for 2-D nodule probability maps.

Architecture summary (either variant):

* An odd number of levels; the first half encode, the middle level is the
  bridge, the second half decode.
* Each level is one pre-activation residual unit: two (BatchNorm -> ReLU ->
  3x3 conv) blocks with an identity skip from the unit's input to its
  output.  When the skip would change shape (channel count or stride) it
  becomes a strided 1x1 projection instead.
* Encoder levels below the first downsample by running their first conv
  with stride 2.  Decoder levels first upsample 2x (nearest neighbour),
  concatenate the matching encoder level's output, then apply their unit.
* A final 1x1 convolution and a sigmoid produce one probability per pixel.
"""

from __future__ import annotations

from typing import Sequence

import torch
from torch import nn
from torch.nn import functional as F

from .config import NetConfig

__all__ = ["ResidualUnit", "ResUNet", "build_model"]


class ResidualUnit(nn.Module):
    """Two pre-activation conv blocks plus an identity (or projection) skip."""

    def __init__(self, in_channels: int, out_channels: int, stride: int = 1):
        super().__init__()
        if stride not in (1, 2):
            raise ValueError(f"stride must be 1 or 2, got {stride}")
        self.bn1 = nn.BatchNorm2d(in_channels)
        self.conv1 = nn.Conv2d(
            in_channels, out_channels, kernel_size=3, stride=stride, padding=1
        )
        self.bn2 = nn.BatchNorm2d(out_channels)
        self.conv2 = nn.Conv2d(
            out_channels, out_channels, kernel_size=3, stride=1, padding=1
        )
        if in_channels == out_channels and stride == 1:
            self.shortcut: nn.Module = nn.Identity()
        else:
            self.shortcut = nn.Conv2d(
                in_channels, out_channels, kernel_size=1, stride=stride
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.conv1(F.relu(self.bn1(x)))
        y = self.conv2(F.relu(self.bn2(y)))
        return y + self.shortcut(x)


class ResUNet(nn.Module):
    """U-shaped stack of residual units with skip concatenation.

    ``levels`` lists ``(filters, first_stride)`` per level, encoder first.
    The list length must be odd; level ``len(levels) // 2`` is the bridge.
    Decoder level ``i`` receives the upsampled previous output concatenated
    with encoder level ``len(levels) - 1 - i``'s output.
    """

    def __init__(self, levels: Sequence[tuple[int, int]], in_channels: int = 1):
        super().__init__()
        levels = [(int(f), int(s)) for f, s in levels]
        if len(levels) < 3 or len(levels) % 2 == 0:
            raise ValueError("levels must be an odd count of at least 3")
        mid = len(levels) // 2
        for f, s in levels:
            if f < 1:
                raise ValueError("filter counts must be positive")
            if s not in (1, 2):
                raise ValueError("strides must be 1 or 2")
        if levels[0][1] != 1:
            raise ValueError("the first level must not downsample")
        if any(s != 1 for _, s in levels[mid + 1 :]):
            raise ValueError("decoder levels must use stride 1")

        self.n_levels = len(levels)
        self.bridge_index = mid

        self.encoder = nn.ModuleList()
        ch = in_channels
        enc_channels: list[int] = []
        for f, s in levels[: mid + 1]:
            self.encoder.append(ResidualUnit(ch, f, stride=s))
            ch = f
            enc_channels.append(f)

        self.decoder = nn.ModuleList()
        for i, (f, s) in enumerate(levels[mid + 1 :]):
            skip_ch = enc_channels[mid - 1 - i]
            self.decoder.append(ResidualUnit(ch + skip_ch, f, stride=s))
            ch = f

        self.head = nn.Conv2d(ch, 1, kernel_size=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4:
            raise ValueError(f"expected a (N, C, H, W) batch, got shape {tuple(x.shape)}")
        skips: list[torch.Tensor] = []
        for unit in self.encoder:
            x = unit(x)
            skips.append(x)
        for i, unit in enumerate(self.decoder):
            x = F.interpolate(x, scale_factor=2, mode="nearest")
            x = torch.cat([x, skips[self.bridge_index - 1 - i]], dim=1)
            x = unit(x)
        return torch.sigmoid(self.head(x))


def build_model(cfg: NetConfig) -> ResUNet:
    """Instantiate the network described by ``cfg`` (randomly initialised)."""
    return ResUNet([(l.filters, l.first_stride) for l in cfg.levels])
