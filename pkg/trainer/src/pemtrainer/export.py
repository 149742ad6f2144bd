"""NNPW weight-file writer: the bridge from trained torch models to the
codec's inference engine.

Node lists use ("input",), ("relu", refs), ("add", refs), ("concat", refs)
and ("conv", refs, nn.Conv2d); see the codec's loader for the byte layout.
"""

from __future__ import annotations

import struct

import numpy as np
import torch
from torch import nn

NNPW_MAGIC = b"NNPW"
NNPW_VERSION = 1
_OPS = {"input": 0, "conv": 1, "relu": 2, "add": 3, "concat": 4}


class UnsupportedLayer(Exception):
    """Model contains a module the NNPW op set cannot express."""


def _conv_payload(conv: nn.Conv2d) -> bytes:
    if conv.padding_mode != "replicate":
        raise UnsupportedLayer(f"conv padding_mode {conv.padding_mode!r}; need replicate")
    if conv.stride != (1, 1) or conv.dilation != (1, 1) or conv.groups != 1:
        raise UnsupportedLayer("strided/dilated/grouped convolutions are not expressible")
    kh, kw = conv.kernel_size
    if conv.padding not in ("same", ((kh - 1) // 2, (kw - 1) // 2)):
        raise UnsupportedLayer(f"conv padding {conv.padding!r} is not same-size")
    weight = conv.weight.detach().cpu().numpy().astype("<f4")
    out_c, in_c, kh, kw = weight.shape
    if conv.bias is not None:
        bias = conv.bias.detach().cpu().numpy().astype("<f4")
    else:
        bias = np.zeros(out_c, dtype="<f4")
    out = struct.pack("<HHHH", kh, kw, in_c, out_c)
    return out + weight.tobytes() + bias.tobytes()


def nodes_to_bytes(nodes) -> bytes:
    out = bytearray()
    out += NNPW_MAGIC
    out += struct.pack("<I", NNPW_VERSION)
    out += struct.pack("<I", len(nodes))
    for node in nodes:
        kind = node[0]
        refs = tuple(node[1]) if len(node) > 1 else ()
        out += struct.pack("<BB", _OPS[kind], len(refs))
        for r in refs:
            out += struct.pack("<I", r)
        if kind == "conv":
            out += _conv_payload(node[2])
    return bytes(out)


def module_to_nodes(model: nn.Module):
    """Build a node list: models provide as_nodes(); plain Sequential chains
    of Conv2d/ReLU are walked directly; anything else is unsupported."""
    if hasattr(model, "as_nodes"):
        return model.as_nodes()
    if isinstance(model, nn.Sequential):
        nodes = [("input",)]
        for layer in model:
            if isinstance(layer, nn.Conv2d):
                nodes.append(("conv", (len(nodes) - 1,), layer))
            elif isinstance(layer, nn.ReLU):
                nodes.append(("relu", (len(nodes) - 1,)))
            else:
                raise UnsupportedLayer(f"cannot export {type(layer).__name__}")
        return nodes
    raise UnsupportedLayer(f"cannot export {type(model).__name__}")


def export_nnpw(model: nn.Module, path) -> None:
    with open(path, "wb") as f:
        f.write(nodes_to_bytes(module_to_nodes(model)))


@torch.no_grad()
def predict_plane(model: nn.Module, img: np.ndarray, query_mask: np.ndarray, init: str) -> np.ndarray:
    """Torch-side prediction with the engine's conventions: initialise,
    scale, forward in float, round half away, clamp, copy context."""
    from .chequer import initialise, round_half_away

    model.eval()
    x = initialise(img, query_mask, init).astype(np.float32) / 255.0
    out = model(torch.from_numpy(x)[None, None]).numpy()[0, 0]
    predicted = np.clip(round_half_away(out.astype(np.float64) * 255.0), 0, 255)
    result = img.copy()
    result[query_mask] = predicted[query_mask].astype(np.uint8)
    return result
