"""Predictor architectures, desk-scale.

Both models are fully convolutional, resolution-preserving, and restricted
to the exportable op set {Conv2d same/replicate, ReLU, add, concat}. Every
conv is followed by ReLU except the final one.
"""

from __future__ import annotations

import torch
from torch import nn


def _conv(in_c: int, out_c: int, k: int) -> nn.Conv2d:
    return nn.Conv2d(in_c, out_c, k, padding="same", padding_mode="replicate")


class MsCnnLite(nn.Module):
    """Multi-scale predictor: parallel 3x3/5x5/7x7 branches (32 channels
    each), concatenation, then two 3x3 fusion convs."""

    def __init__(self, channels: int = 32):
        super().__init__()
        self.branch3 = _conv(1, channels, 3)
        self.branch5 = _conv(1, channels, 5)
        self.branch7 = _conv(1, channels, 7)
        self.fuse1 = _conv(3 * channels, channels, 3)
        self.fuse2 = _conv(channels, 1, 3)
        self.act = nn.ReLU()

    def forward(self, x):
        b3 = self.act(self.branch3(x))
        b5 = self.act(self.branch5(x))
        b7 = self.act(self.branch7(x))
        fused = self.act(self.fuse1(torch.cat([b3, b5, b7], dim=1)))
        return self.fuse2(fused)

    def as_nodes(self):
        nodes = [("input",)]
        for conv in (self.branch3, self.branch5, self.branch7):
            nodes.append(("conv", (0,), conv))
            nodes.append(("relu", (len(nodes) - 1,)))
        nodes.append(("concat", (2, 4, 6)))
        nodes.append(("conv", (len(nodes) - 1,), self.fuse1))
        nodes.append(("relu", (len(nodes) - 1,)))
        nodes.append(("conv", (len(nodes) - 1,), self.fuse2))
        return nodes


class _DenseBlock(nn.Module):
    """Residual dense block: densely connected 3x3 convs, 1x1 local fusion,
    then a skip connection from the block input."""

    def __init__(self, channels: int, convs: int):
        super().__init__()
        self.convs = nn.ModuleList(
            _conv(channels * (k + 1), channels, 3) for k in range(convs)
        )
        self.fuse = _conv(channels * (convs + 1), channels, 1)
        self.act = nn.ReLU()

    def forward(self, x):
        feats = [x]
        for conv in self.convs:
            feats.append(self.act(conv(torch.cat(feats, dim=1))))
        return x + self.fuse(torch.cat(feats, dim=1))

    def as_nodes(self, nodes: list, entry: int) -> int:
        feats = [entry]
        for conv in self.convs:
            src = feats[0] if len(feats) == 1 else self._concat(nodes, feats)
            nodes.append(("conv", (src,), conv))
            nodes.append(("relu", (len(nodes) - 1,)))
            feats.append(len(nodes) - 1)
        nodes.append(("conv", (self._concat(nodes, feats),), self.fuse))
        nodes.append(("add", (entry, len(nodes) - 1)))
        return len(nodes) - 1

    @staticmethod
    def _concat(nodes: list, feats: list) -> int:
        nodes.append(("concat", tuple(feats)))
        return len(nodes) - 1


class RdnLite(nn.Module):
    """Residual dense network, desk scale: 3 blocks of 5 densely connected
    convs at 64 channels, global 1x1 fusion, shallow skip, final conv."""

    def __init__(self, channels: int = 64, blocks: int = 3, convs_per_block: int = 5):
        super().__init__()
        self.shallow = _conv(1, channels, 3)
        self.blocks = nn.ModuleList(_DenseBlock(channels, convs_per_block) for _ in range(blocks))
        self.global_fuse = _conv(channels * blocks, channels, 1)
        self.global_conv = _conv(channels, channels, 3)
        self.final = _conv(channels, 1, 3)
        self.act = nn.ReLU()

    def forward(self, x):
        shallow = self.act(self.shallow(x))
        feats = []
        h = shallow
        for block in self.blocks:
            h = block(h)
            feats.append(h)
        fused = self.act(self.global_fuse(torch.cat(feats, dim=1)))
        deep = self.act(self.global_conv(fused))
        return self.final(shallow + deep)

    def as_nodes(self):
        nodes = [("input",)]
        nodes.append(("conv", (0,), self.shallow))
        nodes.append(("relu", (len(nodes) - 1,)))
        shallow = len(nodes) - 1
        feats = []
        entry = shallow
        for block in self.blocks:
            entry = block.as_nodes(nodes, entry)
            feats.append(entry)
        nodes.append(("concat", tuple(feats)))
        nodes.append(("conv", (len(nodes) - 1,), self.global_fuse))
        nodes.append(("relu", (len(nodes) - 1,)))
        nodes.append(("conv", (len(nodes) - 1,), self.global_conv))
        nodes.append(("relu", (len(nodes) - 1,)))
        nodes.append(("add", (shallow, len(nodes) - 1)))
        nodes.append(("conv", (len(nodes) - 1,), self.final))
        return nodes


ARCHITECTURES = {"mscnn-lite": MsCnnLite, "rdn-lite": RdnLite}


def build(arch: str) -> nn.Module:
    try:
        return ARCHITECTURES[arch]()
    except KeyError:
        raise ValueError(f"unknown architecture {arch!r}") from None
