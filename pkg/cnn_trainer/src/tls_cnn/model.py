"""ResNet-style backbone with four independent fully connected heads.

The backbone is the 18-layer residual topology (two basic blocks per
stage) with the channel widths scaled down for desk-scale data and the
first convolution taking a single input channel.  The shared feature
vector feeds four separate FC stacks, one per target component, so the
heads learn independently on top of common features.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass
class ModelSpec:
    base_width: int = 16
    head_hidden: tuple[int, ...] = (256, 64)
    input_size: tuple[int, int] = (100, 100)
    n_targets: int = 4
    blocks_per_stage: tuple[int, ...] = field(default=(2, 2, 2, 2))

    def __post_init__(self):
        if self.n_targets != 4:
            raise ValueError("the regressor predicts exactly 4 components")
        if self.base_width < 1 or any(b < 1 for b in self.blocks_per_stage):
            raise ValueError("invalid backbone spec")


class BasicBlock(nn.Module):
    def __init__(self, c_in, c_out, stride=1):
        super().__init__()
        self.conv1 = nn.Conv2d(c_in, c_out, 3, stride, 1, bias=False)
        self.bn1 = nn.BatchNorm2d(c_out)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, 1, 1, bias=False)
        self.bn2 = nn.BatchNorm2d(c_out)
        self.shortcut = None
        if stride != 1 or c_in != c_out:
            self.shortcut = nn.Sequential(
                nn.Conv2d(c_in, c_out, 1, stride, bias=False),
                nn.BatchNorm2d(c_out),
            )

    def forward(self, x):
        identity = x if self.shortcut is None else self.shortcut(x)
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return F.relu(out + identity)


class FCHead(nn.Module):
    """Stack of fully connected layers y = relu(Wx + b); last layer linear."""

    def __init__(self, n_in, hidden):
        super().__init__()
        layers = []
        for width in hidden:
            layers += [nn.Linear(n_in, width), nn.ReLU()]
            n_in = width
        layers.append(nn.Linear(n_in, 1))
        self.stack = nn.Sequential(*layers)

    def forward(self, x):
        return self.stack(x)


class SpectroscopyRegressor(nn.Module):
    def __init__(self, spec: ModelSpec | None = None):
        super().__init__()
        self.spec = spec or ModelSpec()
        w = self.spec.base_width

        self.stem = nn.Sequential(
            nn.Conv2d(1, w, 7, 2, 3, bias=False),
            nn.BatchNorm2d(w),
            nn.ReLU(),
            nn.MaxPool2d(3, 2, 1),
        )
        stages = []
        c_in = w
        for i, n_blocks in enumerate(self.spec.blocks_per_stage):
            c_out = w * (2**i)
            for b in range(n_blocks):
                stride = 2 if (i > 0 and b == 0) else 1
                stages.append(BasicBlock(c_in, c_out, stride))
                c_in = c_out
        self.stages = nn.Sequential(*stages)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.heads = nn.ModuleList(
            FCHead(c_in, self.spec.head_hidden) for _ in range(self.spec.n_targets)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() == 3:
            x = x.unsqueeze(1)
        if x.shape[-2:] != torch.Size(self.spec.input_size):
            x = F.interpolate(
                x, size=self.spec.input_size, mode="bilinear", align_corners=False
            )
        features = self.pool(self.stages(self.stem(x))).flatten(1)
        return torch.cat([head(features) for head in self.heads], dim=1)


def build_model(spec: ModelSpec | None = None) -> SpectroscopyRegressor:
    return SpectroscopyRegressor(spec)
