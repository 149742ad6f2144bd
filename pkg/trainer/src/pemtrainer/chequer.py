"""Chequer geometry and query initialisation, kept convention-identical to
the inference engine: (0, 0) is white (even i+j), rounding is half away
from zero.
"""

from __future__ import annotations

import numpy as np


def checker_masks(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """(black, white) boolean masks; black is odd i+j."""
    i, j = np.indices((height, width))
    black = ((i + j) % 2).astype(bool)
    return black, ~black


def round_half_away(values: np.ndarray) -> np.ndarray:
    return np.trunc(values + np.copysign(0.5, values))


def neighbour_mean(img: np.ndarray) -> np.ndarray:
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


def initialise(img: np.ndarray, query_mask: np.ndarray, init: str) -> np.ndarray:
    """Fill query pixels with zeros or the local mean of their context."""
    out = img.copy()
    if init == "zero":
        out[query_mask] = 0
    elif init == "localmean":
        out[query_mask] = neighbour_mean(img)[query_mask].astype(img.dtype)
    else:
        raise ValueError(f"unknown init {init!r}")
    return out


def predict_lmi(img: np.ndarray, query_mask: np.ndarray) -> np.ndarray:
    """Local-mean interpolation baseline, context copied through."""
    out = img.copy()
    out[query_mask] = neighbour_mean(img)[query_mask].astype(img.dtype)
    return out
