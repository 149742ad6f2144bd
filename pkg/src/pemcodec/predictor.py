"""Context-aware pixel-intensity prediction.

Two predictor families share one calling convention,
``predict(img, query_mask) -> plane``:

* local-mean interpolation (LMI): each query pixel becomes the rounded mean
  of its in-bounds von Neumann neighbours (4 interior, 3 edge, 2 corner);
* convolutional graphs loaded from NNPW weight files, evaluated in float64
  in serialized node order so repeated runs are bit-identical.

Rounding is half away from zero everywhere (initialisation and prediction
output alike); the same rule on both sides is what keeps encode and decode
in lockstep.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    DanglingInputRef,
    GraphEvalError,
    ImageTooSmall,
    ShapeMismatch,
    VersionUnsupported,
)
from .imaging import as_plane

NNPW_MAGIC = b"NNPW"
NNPW_VERSION = 1

OP_INPUT = 0
OP_CONV2D = 1
OP_RELU = 2
OP_ADD = 3
OP_CONCAT = 4


class InitStrategy(enum.Enum):
    """How query pixels are filled before a plane enters a ConvGraph."""

    ZERO = "zero"
    LOCAL_MEAN = "localmean"


def round_half_away(values: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero (symmetric at mid-grey)."""
    return np.trunc(values + np.copysign(0.5, values))


def _neighbour_mean(img: np.ndarray) -> np.ndarray:
    """Rounded mean of in-bounds von Neumann neighbours at every position."""
    x = img.astype(np.float64)
    total = np.zeros_like(x)
    count = np.zeros_like(x)
    total[1:, :] += x[:-1, :]
    total[:-1, :] += x[1:, :]
    total[:, 1:] += x[:, :-1]
    total[:, :-1] += x[:, 1:]
    count[1:, :] += 1
    count[:-1, :] += 1
    count[:, 1:] += 1
    count[:, :-1] += 1
    return round_half_away(total / count)


def initialise(img, query_mask: np.ndarray, strategy: InitStrategy) -> np.ndarray:
    """Replace query samples per the strategy; context samples pass through.

    Local-mean initialisation only ever reads context values: by chequer
    parity every neighbour of a query pixel is a context pixel.
    """
    img = as_plane(img)
    out = img.copy()
    if strategy is InitStrategy.ZERO:
        out[query_mask] = 0
    elif strategy is InitStrategy.LOCAL_MEAN:
        means = _neighbour_mean(img)
        out[query_mask] = means[query_mask].astype(np.uint8)
    else:
        raise ValueError(f"unknown init strategy {strategy!r}")
    return out


def predict_lmi(img, query_mask: np.ndarray) -> np.ndarray:
    """LMI prediction: query pixels from neighbour means, context copied through."""
    img = as_plane(img)
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise ImageTooSmall(f"LMI needs at least 2x2, got {img.shape}")
    out = img.copy()
    means = _neighbour_mean(img)
    out[query_mask] = means[query_mask].astype(np.uint8)
    return out


# ---------------------------------------------------------------------------
# Convolutional graphs (NNPW format)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    op: int
    inputs: tuple[int, ...] = ()
    kernel: np.ndarray | None = None  # (out_c, in_c, kh, kw) float64
    bias: np.ndarray | None = None  # (out_c,) float64


@dataclass(frozen=True)
class ConvGraph:
    """A validated DAG of {Input, Conv2D, ReLU, Add, Concat} nodes.

    The last node is the output; channel counts are propagated at load so
    evaluation cannot hit a channel mismatch.
    """

    nodes: tuple[Node, ...]
    channels: tuple[int, ...] = field(repr=False, default=())


def _node_channels(node: Node, index: int, channels: list[int]) -> int:
    if node.op == OP_INPUT:
        return 1
    in_ch = [channels[r] for r in node.inputs]
    if node.op == OP_CONV2D:
        if in_ch[0] != node.kernel.shape[1]:
            raise ShapeMismatch(
                f"node {index}: conv expects {node.kernel.shape[1]} input "
                f"channels, gets {in_ch[0]}"
            )
        return node.kernel.shape[0]
    if node.op == OP_RELU:
        return in_ch[0]
    if node.op == OP_ADD:
        if len(set(in_ch)) != 1:
            raise ShapeMismatch(f"node {index}: add inputs have channels {in_ch}")
        return in_ch[0]
    if node.op == OP_CONCAT:
        return sum(in_ch)
    raise ShapeMismatch(f"node {index}: unknown op code {node.op}")


def validate_graph(nodes: list[Node]) -> ConvGraph:
    if not nodes:
        raise ShapeMismatch("graph has no nodes")
    if sum(1 for n in nodes if n.op == OP_INPUT) != 1:
        raise ShapeMismatch("graph must contain exactly one input node")
    arity = {OP_INPUT: 0, OP_CONV2D: 1, OP_RELU: 1}
    channels: list[int] = []
    for i, node in enumerate(nodes):
        for ref in node.inputs:
            if not 0 <= ref < i:
                raise DanglingInputRef(f"node {i} references node {ref}")
        want = arity.get(node.op)
        if want is not None and len(node.inputs) != want:
            raise ShapeMismatch(
                f"node {i}: op {node.op} takes {want} inputs, got {len(node.inputs)}"
            )
        if node.op in (OP_ADD, OP_CONCAT) and not node.inputs:
            raise ShapeMismatch(f"node {i}: op {node.op} needs at least one input")
        channels.append(_node_channels(node, i, channels))
    if channels[-1] != 1:
        raise ShapeMismatch(f"output node must have 1 channel, has {channels[-1]}")
    return ConvGraph(tuple(nodes), tuple(channels))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise ShapeMismatch("weight file ends mid-field")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def floats(self, count: int) -> np.ndarray:
        size = 4 * count
        if self.pos + size > len(self.data):
            raise ShapeMismatch(f"weight file ends inside a {count}-float tensor")
        out = np.frombuffer(self.data, dtype="<f4", count=count, offset=self.pos)
        self.pos += size
        return out


def load_weights(path) -> ConvGraph:
    """Parse and validate an NNPW weight file.

    Layout (little-endian): magic "NNPW", u32 version=1, u32 node count;
    per node u8 op code, u8 input count, u32 input refs (earlier nodes only);
    Conv2D nodes add u16 kh, kw, in_c, out_c, then out_c*in_c*kh*kw float32
    weights (out-major, then in, then row, then col) and out_c float32
    biases. The last node is the output.
    """
    with open(path, "rb") as f:
        data = f.read()
    r = _Reader(data)
    if data[:4] != NNPW_MAGIC:
        raise BadMagic(f"expected {NNPW_MAGIC!r} magic, found {data[:4]!r}")
    r.pos = 4
    (version,) = r.take("<I")
    if version != NNPW_VERSION:
        raise VersionUnsupported(f"NNPW version {version} unsupported")
    (node_count,) = r.take("<I")
    nodes: list[Node] = []
    for _ in range(node_count):
        op, n_inputs = r.take("<BB")
        inputs = r.take(f"<{n_inputs}I") if n_inputs else ()
        if op == OP_CONV2D:
            kh, kw, in_c, out_c = r.take("<HHHH")
            if 0 in (kh, kw, in_c, out_c):
                raise ShapeMismatch(f"conv with zero dimension {(kh, kw, in_c, out_c)}")
            weights = r.floats(out_c * in_c * kh * kw).reshape(out_c, in_c, kh, kw)
            bias = r.floats(out_c)
            nodes.append(
                Node(op, tuple(inputs), weights.astype(np.float64), bias.astype(np.float64))
            )
        elif op in (OP_INPUT, OP_RELU, OP_ADD, OP_CONCAT):
            nodes.append(Node(op, tuple(inputs)))
        else:
            raise ShapeMismatch(f"unknown op code {op}")
    if r.pos != len(data):
        raise ShapeMismatch(f"{len(data) - r.pos} trailing bytes after last node")
    return validate_graph(nodes)


def _conv2d_same(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-size convolution with edge-replicate padding, float64 im2col."""
    out_c, in_c, kh, kw = kernel.shape
    top, left = (kh - 1) // 2, (kw - 1) // 2
    padded = np.pad(x, ((0, 0), (top, kh - 1 - top), (left, kw - 1 - left)), mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (kh, kw), axis=(1, 2))
    h, w = x.shape[1], x.shape[2]
    cols = windows.transpose(1, 2, 0, 3, 4).reshape(h * w, in_c * kh * kw)
    out = cols @ kernel.reshape(out_c, in_c * kh * kw).T + bias
    return out.T.reshape(out_c, h, w)


def eval_graph(graph: ConvGraph, x: np.ndarray) -> np.ndarray:
    """Forward pass over a (1, H, W) float64 plane, fixed node order."""
    values: list[np.ndarray] = []
    for i, node in enumerate(graph.nodes):
        try:
            if node.op == OP_INPUT:
                values.append(x)
            elif node.op == OP_CONV2D:
                values.append(_conv2d_same(values[node.inputs[0]], node.kernel, node.bias))
            elif node.op == OP_RELU:
                values.append(np.maximum(values[node.inputs[0]], 0.0))
            elif node.op == OP_ADD:
                acc = values[node.inputs[0]].copy()
                for ref in node.inputs[1:]:
                    acc += values[ref]
                values.append(acc)
            else:  # OP_CONCAT
                values.append(np.concatenate([values[r] for r in node.inputs], axis=0))
        except ValueError as exc:
            raise GraphEvalError(f"node {i} (op {node.op}): {exc}") from exc
    return values[-1]


def predict_nn(
    graph: ConvGraph, img, query_mask: np.ndarray, strategy: InitStrategy
) -> np.ndarray:
    """Graph prediction: initialise queries, scale to [0,1], run, rescale.

    Output is rounded half away from zero and clamped to [0,255]; context
    positions are copied through unchanged.
    """
    img = as_plane(img)
    x = initialise(img, query_mask, strategy).astype(np.float64)[None, :, :] / 255.0
    out = eval_graph(graph, x)
    if out.shape != (1, *img.shape):
        raise GraphEvalError(f"graph output shape {out.shape} != {(1, *img.shape)}")
    predicted = np.clip(round_half_away(out[0] * 255.0), 0, 255).astype(np.uint8)
    result = img.copy()
    result[query_mask] = predicted[query_mask]
    return result


# ---------------------------------------------------------------------------
# Predictor objects as used by the codec
# ---------------------------------------------------------------------------


class LmiPredictor:
    """The heuristic baseline; needs no initialisation strategy."""

    name = "lmi"

    def predict(self, img, query_mask: np.ndarray) -> np.ndarray:
        return predict_lmi(img, query_mask)

    def __repr__(self) -> str:
        return "LmiPredictor()"


@dataclass(frozen=True)
class ConvPredictor:
    graph: ConvGraph
    init: InitStrategy
    name: str = "nn"

    def predict(self, img, query_mask: np.ndarray) -> np.ndarray:
        return predict_nn(self.graph, img, query_mask, self.init)
