"""Overflow prevention: shift near-boundary intensities inward before
embedding and undo the shifts afterwards using a per-pixel flag register.

For a channel half-width theta the intensity axis splits into

    L1 = [0, theta-1]            shifted up by theta, flag 1
    L0 = [theta, 2*theta-1]      kept, flag 0
    U0 = [255-2*theta+1, 255-theta]  kept, flag 0
    U1 = [255-theta+1, 255]      shifted down by theta, flag 1

After the shift every sample lies in [theta, 255-theta], so a later +-theta
perturbation cannot wrap. Flags are produced and consumed in raster order.
The four intervals are pairwise disjoint only while 2*theta-1 < 255-2*theta+1,
hence the theta <= 63 cap.
"""

from __future__ import annotations

import numpy as np

from .bitstream import BitStream
from .errors import InvalidTheta, RegisterLengthMismatch
from .imaging import as_plane

THETA_MAX = 63


def check_theta(theta: int) -> int:
    if not isinstance(theta, (int, np.integer)) or not 1 <= theta <= THETA_MAX:
        raise InvalidTheta(f"theta must be an integer in [1, {THETA_MAX}], got {theta!r}")
    return int(theta)


def _interval_masks(samples: np.ndarray, theta: int):
    l1 = samples <= theta - 1
    l0 = (samples >= theta) & (samples <= 2 * theta - 1)
    u0 = (samples >= 255 - 2 * theta + 1) & (samples <= 255 - theta)
    u1 = samples >= 255 - theta + 1
    return l1, l0, u0, u1


def preprocess(img, theta: int) -> tuple[np.ndarray, BitStream]:
    """Shift L1/U1 samples inward; return the shifted plane and flag register.

    Flag 1 marks a shifted pixel, flag 0 a pixel that natively sat in L0/U0;
    one flag per output pixel whose value lands in L0 or U0, raster order.
    """
    theta = check_theta(theta)
    img = as_plane(img)
    x = img.astype(np.int16)
    l1, l0, u0, u1 = _interval_masks(x, theta)
    x[l1] += theta
    x[u1] -= theta
    flagged = l1 | l0 | u0 | u1
    register = BitStream((l1 | u1)[flagged].astype(np.uint8))
    return x.astype(np.uint8), register


def postprocess(img, register: BitStream, theta: int) -> np.ndarray:
    """Invert preprocess: shift flagged pixels back out, raster order."""
    theta = check_theta(theta)
    img = as_plane(img)
    expected = count_register_bits(img, theta)
    if len(register) != expected:
        raise RegisterLengthMismatch(
            f"register holds {len(register)} flags but the image has "
            f"{expected} flagged pixels"
        )
    x = img.astype(np.int16)
    _, l0, u0, _ = _interval_masks(x, theta)
    flagged = l0 | u0
    shifted = np.zeros(x.shape, dtype=bool)
    shifted[flagged] = register.bits.astype(bool)
    x[shifted & l0] -= theta
    x[shifted & u0] += theta
    return x.astype(np.uint8)


def count_register_bits(img, theta: int) -> int:
    """Number of samples in L0 or U0: the register length the decoder derives."""
    theta = check_theta(theta)
    img = as_plane(img).astype(np.int16)
    _, l0, u0, _ = _interval_masks(img, theta)
    return int((l0 | u0).sum())
