"""First-layer steganographic distortion for causal training.

The causal strategy needs second-layer training inputs whose white pixels
carry real embedding distortion. This module re-implements the codec's
overflow guard and residual modulation rules; with a random payload the
per-pixel modulation draws are independent, so they are sampled directly:

    eps == 0           -> eps' in {0 (p=1/2), -1 (p=1/4), +1 (p=1/4)}
    0 < |eps| < theta  -> eps' = 2*eps + sign(eps)*Bernoulli(1/2)
    |eps| >= theta     -> eps' = eps + sign(eps)*theta

which is exactly the distribution the deployed encoder induces.
"""

from __future__ import annotations

import numpy as np


def preprocess(img: np.ndarray, theta: int) -> np.ndarray:
    """Shift samples into [theta, 255-theta] (overflow guard, flags dropped:
    training only needs the value distribution, not reversibility)."""
    x = img.astype(np.int16)
    x[x <= theta - 1] += theta
    x[x >= 255 - theta + 1] -= theta
    return x.astype(np.uint8)


def modulate_residuals(eps: np.ndarray, theta: int, rng: np.random.Generator) -> np.ndarray:
    """Apply the residual code chart with an i.i.d. random payload."""
    eps = eps.astype(np.int16)
    out = eps.copy()
    sign = np.sign(eps).astype(np.int16)

    shift = np.abs(eps) >= theta
    out[shift] = eps[shift] + sign[shift] * theta

    small = (np.abs(eps) > 0) & (np.abs(eps) < theta)
    bits = rng.integers(0, 2, int(small.sum())).astype(np.int16)
    out[small] = 2 * eps[small] + sign[small] * bits

    zero = eps == 0
    draws = rng.random(int(zero.sum()))
    trits = np.zeros(draws.size, dtype=np.int16)
    trits[draws >= 0.75] = 1
    trits[(draws >= 0.5) & (draws < 0.75)] = -1
    out[zero] = trits
    return out


def embed_first_layer(
    img: np.ndarray,
    predicted: np.ndarray,
    white_mask: np.ndarray,
    theta: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Return the guarded plane with modulated white queries.

    `img` must already be preprocessed; `predicted` is the first-layer
    prediction for the white set.
    """
    eps = img.astype(np.int16)[white_mask] - predicted.astype(np.int16)[white_mask]
    eps_p = modulate_residuals(eps, theta, rng)
    out = img.copy()
    stego_vals = predicted.astype(np.int16)[white_mask] + eps_p
    if stego_vals.min() < 0 or stego_vals.max() > 255:
        raise ValueError("modulated pixel left [0, 255]; input was not preprocessed")
    out[white_mask] = stego_vals.astype(np.uint8)
    return out
