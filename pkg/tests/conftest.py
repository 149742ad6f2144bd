import struct

import numpy as np
import pytest


def smooth_plane(rng, shape=(64, 64), block=8, noise=2.0):
    """Random test image with natural-image statistics: a low-frequency
    field (so prediction residuals concentrate near zero and the stego
    channel has real capacity) spanning the full intensity range (so the
    overflow register path gets exercised).
    """
    h, w = shape
    coarse = rng.integers(0, 256, ((h + block - 1) // block, (w + block - 1) // block))
    img = np.kron(coarse, np.ones((block, block)))[:h, :w].astype(np.float64)
    for _ in range(2):
        acc = 4.0 * img
        acc[1:, :] += img[:-1, :]
        acc[:-1, :] += img[1:, :]
        acc[:, 1:] += img[:, :-1]
        acc[:, :-1] += img[:, 1:]
        cnt = np.full(img.shape, 4.0)
        cnt[1:, :] += 1
        cnt[:-1, :] += 1
        cnt[:, 1:] += 1
        cnt[:, :-1] += 1
        img = acc / cnt
    if noise:
        img += rng.normal(0.0, noise, img.shape)
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# NNPW byte emission (kept independent of the loader under test)
# ---------------------------------------------------------------------------

_OPS = {"input": 0, "conv": 1, "relu": 2, "add": 3, "concat": 4}


def nnpw_bytes(nodes, magic=b"NNPW", version=1):
    """Serialize a node list to NNPW bytes.

    Each node is ("input",), ("relu", refs), ("add", refs), ("concat", refs)
    or ("conv", refs, weights (out,in,kh,kw) array, biases array).
    """
    out = bytearray()
    out += magic
    out += struct.pack("<I", version)
    out += struct.pack("<I", len(nodes))
    for node in nodes:
        kind = node[0]
        refs = node[1] if len(node) > 1 else ()
        out += struct.pack("<BB", _OPS[kind], len(refs))
        for r in refs:
            out += struct.pack("<I", r)
        if kind == "conv":
            weights = np.asarray(node[2], dtype=np.float32)
            biases = np.asarray(node[3], dtype=np.float32)
            o, i, kh, kw = weights.shape
            out += struct.pack("<HHHH", kh, kw, i, o)
            out += weights.tobytes()
            out += biases.tobytes()
    return bytes(out)


def identity_nodes():
    return [("input",), ("conv", (0,), np.ones((1, 1, 1, 1)), np.zeros(1))]


@pytest.fixture
def identity_graph_path(tmp_path):
    path = tmp_path / "identity.nnpw"
    path.write_bytes(nnpw_bytes(identity_nodes()))
    return path
