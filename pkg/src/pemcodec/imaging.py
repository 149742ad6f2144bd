"""Pixel planes, binary PGM I/O, and the chequered context/query geometry.

A pixel plane is a 2D uint8 numpy array, row-major. Coordinates are 0-based
with (0, 0) in the white set: white = even i+j, black = odd i+j. Encode and
decode only need to agree on the convention, and this one makes every von
Neumann neighbour of a white pixel black and vice versa.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, ImageTooSmall, UnsupportedFormat


def as_plane(img) -> np.ndarray:
    """Validate and return an 8-bit greyscale plane."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2D plane, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("plane samples must be integers")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("plane samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def checker_masks(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (black, white) boolean masks; black is odd i+j."""
    i, j = np.indices((height, width))
    black = ((i + j) % 2).astype(bool)
    return black, ~black


def split(img) -> tuple[np.ndarray, np.ndarray]:
    """Partition a plane into (black, white) masks.

    Raises ImageTooSmall below 2x2, where a query pixel would have fewer than
    two context neighbours.
    """
    img = as_plane(img)
    h, w = img.shape
    if h < 2 or w < 2:
        raise ImageTooSmall(f"need at least 2x2, got {h}x{w}")
    return checker_masks(h, w)


def merge(black_samples, white_samples, shape: tuple[int, int]) -> np.ndarray:
    """Rebuild a plane from per-mask sample vectors in raster order.

    Inverse of ``img[mask]`` extraction: merge(img[black], img[white], img.shape)
    reproduces img.
    """
    h, w = shape
    black, white = checker_masks(h, w)
    black_samples = np.asarray(black_samples, dtype=np.uint8).ravel()
    white_samples = np.asarray(white_samples, dtype=np.uint8).ravel()
    if black_samples.size != int(black.sum()) or white_samples.size != int(white.sum()):
        raise DimensionMismatch(
            f"sample counts ({black_samples.size} black, {white_samples.size} white) "
            f"do not cover a {h}x{w} plane"
        )
    out = np.empty((h, w), dtype=np.uint8)
    out[black] = black_samples
    out[white] = white_samples
    return out


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM with maxval 255.

    Anything else, including comment lines, is rejected as UnsupportedFormat;
    files that end before width*height samples raise EOFError.
    """
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] != b"P5":
        if data[:2] in (b"P1", b"P2", b"P3", b"P4", b"P6"):
            raise UnsupportedFormat(f"unsupported PNM type {data[:2]!r}; only P5 is handled")
        raise UnsupportedFormat("not a PGM file (missing P5 magic)")

    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise EOFError("PGM header truncated")
        token = data[start:pos]
        if token.startswith(b"#"):
            raise UnsupportedFormat("comment lines are not supported")
        if not token.isdigit():
            raise UnsupportedFormat(f"malformed header token {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedFormat(f"maxval {maxval} unsupported; only 8-bit (255) PGM")
    pos += 1  # single whitespace byte after maxval
    samples = np.frombuffer(data, dtype=np.uint8, count=-1, offset=pos)
    if samples.size < width * height:
        raise EOFError(
            f"truncated pixel data: expected {width * height} bytes, got {samples.size}"
        )
    return samples[: width * height].reshape(height, width).copy()


def write_pgm(img, path) -> None:
    img = as_plane(img)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())
