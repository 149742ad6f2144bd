"""Quality and error-distribution analytics: PSNR, SSIM, residual
statistics (entropy, variance, 95th percentile, Gini/Lorenz), and
rate-distortion sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import codec, imaging, overflow
from .bitstream import BitStream
from .errors import (
    DegenerateAllZero,
    DimensionMismatch,
    EmptyDistribution,
    ImageTooSmall,
)
from .predictor import LmiPredictor
from .prng import XorShift64Star

MAX_ERROR = 255  # signed prediction errors live in [-255, 255]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_L = 255.0


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB; inf marks identical planes."""
    a = imaging.as_plane(a)
    b = imaging.as_plane(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def _gaussian_kernel_1d(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2
    xs = np.arange(size) - half
    k = np.exp(-(xs**2) / (2 * sigma**2))
    return k / k.sum()


def _filter_valid(img: np.ndarray, k1d: np.ndarray) -> np.ndarray:
    """Separable correlation, valid region only."""
    n = k1d.size
    rows = np.lib.stride_tricks.sliding_window_view(img, n, axis=1) @ k1d
    return np.lib.stride_tricks.sliding_window_view(rows, n, axis=0) @ k1d


def ssim(a, b) -> float:
    """Mean local SSIM (Wang et al. parameters: 11x11 Gaussian, sigma 1.5)."""
    a = imaging.as_plane(a)
    b = imaging.as_plane(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise ImageTooSmall(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}")
    x = a.astype(np.float64)
    y = b.astype(np.float64)
    k = _gaussian_kernel_1d(SSIM_WINDOW, SSIM_SIGMA)
    mu_x = _filter_valid(x, k)
    mu_y = _filter_valid(y, k)
    var_x = _filter_valid(x * x, k) - mu_x**2
    var_y = _filter_valid(y * y, k) - mu_y**2
    cov = _filter_valid(x * y, k) - mu_x * mu_y
    c1 = (SSIM_K1 * SSIM_L) ** 2
    c2 = (SSIM_K2 * SSIM_L) ** 2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


# ---------------------------------------------------------------------------
# Prediction-error distribution statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorDistribution:
    """Histogram over signed errors in [-255, 255]."""

    counts: np.ndarray  # length 511, index = error + 255
    total: int

    @classmethod
    def from_errors(cls, errors) -> "ErrorDistribution":
        errors = np.asarray(errors).ravel()
        if errors.size and (errors.min() < -MAX_ERROR or errors.max() > MAX_ERROR):
            raise ValueError("errors outside [-255, 255]")
        counts = np.bincount((errors + MAX_ERROR).astype(np.int64), minlength=2 * MAX_ERROR + 1)
        return cls(counts.astype(np.int64), int(errors.size))

    def magnitude_counts(self) -> np.ndarray:
        """Counts over |error| in [0, 255]."""
        mags = np.zeros(MAX_ERROR + 1, dtype=np.int64)
        mags[0] = self.counts[MAX_ERROR]
        mags[1:] = self.counts[MAX_ERROR + 1 :] + self.counts[: MAX_ERROR][::-1]
        return mags


def first_layer_errors(img, predictor, theta: int) -> ErrorDistribution:
    """Signed prediction errors at white queries of the pre-processed cover."""
    img = imaging.as_plane(img)
    x_checked, _ = overflow.preprocess(img, theta)
    _, white = imaging.split(x_checked)
    predicted = predictor.predict(x_checked, white)
    eps = x_checked.astype(np.int16)[white] - predicted.astype(np.int16)[white]
    return ErrorDistribution.from_errors(eps)


def _gini_from_magnitudes(mags: np.ndarray, total: int) -> float:
    """Gini over magnitudes via rank-weighted sums, closed form.

    Equal to 1 - 2 * (trapezoid area under the Lorenz polyline); 0 for the
    all-zero distribution by convention.
    """
    values = np.arange(mags.size, dtype=np.float64)
    weight_sum = float(values @ mags)
    if weight_sum == 0.0:
        return 0.0
    before = np.concatenate([[0], np.cumsum(mags)[:-1]]).astype(np.float64)
    counts = mags.astype(np.float64)
    # sum of ranks within each value's run: c*before + c*(c+1)/2
    rank_weighted = float(np.sum(values * (counts * before + counts * (counts + 1) / 2)))
    n = float(total)
    return 2.0 * rank_weighted / (n * weight_sum) - (n + 1.0) / n


def error_stats(dist: ErrorDistribution) -> dict[str, float]:
    """Entropy (bits), population variance, 95th percentile of |error|, Gini."""
    if dist.total < 1:
        raise EmptyDistribution("no samples")
    p = dist.counts / dist.total
    nz = p[p > 0]
    entropy = float(-(nz * np.log2(nz)).sum())
    values = np.arange(-MAX_ERROR, MAX_ERROR + 1, dtype=np.float64)
    mean = float(p @ values)
    variance = float(p @ values**2) - mean**2
    mags = dist.magnitude_counts()
    cum = np.cumsum(mags)
    p95 = int(np.searchsorted(cum, 0.95 * dist.total))
    return {
        "entropy_bits": entropy,
        "variance": variance,
        "p95": float(p95),
        "gini": _gini_from_magnitudes(mags, dist.total),
    }


def lorenz_curve(dist: ErrorDistribution) -> np.ndarray:
    """Lorenz polyline over |error|: rows of (population share, magnitude share).

    Starts at (0, 0), ends at (1, 1); only magnitudes with samples contribute
    vertices in between (runs of equal values are collinear anyway).
    """
    if dist.total < 1:
        raise EmptyDistribution("no samples")
    mags = dist.magnitude_counts()
    weight = np.arange(mags.size) * mags
    if weight.sum() == 0:
        raise DegenerateAllZero("all magnitudes zero; Lorenz curve undefined")
    pop = np.cumsum(mags) / dist.total
    share = np.cumsum(weight) / weight.sum()
    keep = mags > 0
    points = np.column_stack([pop[keep], share[keep]])
    return np.vstack([[0.0, 0.0], points])


def gini_from_lorenz(points: np.ndarray) -> float:
    """1 - 2 * area under the polyline (trapezoid rule)."""
    x = points[:, 0]
    y = points[:, 1]
    area = float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))
    return 1.0 - 2.0 * area


# ---------------------------------------------------------------------------
# Rate-distortion sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RdPoint:
    theta: int
    message_bits: int
    bpp: float
    psnr_db: float
    ssim: float


def rd_curve(
    img,
    thetas,
    predictor=None,
    second_predictor=None,
    steps: int = 10,
    seed: int = 0,
) -> list[RdPoint]:
    """Embed seeded random messages at 10%..100% of capacity per theta.

    Each step's message is a prefix of one full-capacity random message, so
    larger steps differ from smaller ones only by the extra random tail.
    """
    img = imaging.as_plane(img)
    rows: list[RdPoint] = []
    for theta in thetas:
        params = codec.StegoParams(
            int(theta),
            predictor if predictor is not None else LmiPredictor(),
            second_predictor,
        )
        capacity = codec.estimate_capacity(img, params)
        full = XorShift64Star(seed ^ (int(theta) << 32)).bits(capacity)
        for step in range(1, steps + 1):
            nbits = (capacity * step) // steps
            message = BitStream(full[:nbits])
            stego = codec.encode(img, message, params)
            rows.append(
                RdPoint(
                    theta=int(theta),
                    message_bits=nbits,
                    bpp=nbits / img.size,
                    psnr_db=psnr(img, stego),
                    ssim=ssim(img, stego),
                )
            )
    return rows
