"""Corpus preparation and loading.

A corpus is a flat directory of 256x256 greyscale PGMs. ``prepare_corpus``
builds one either from a folder of arbitrary images (greyscale conversion +
Lanczos resize) or, for self-contained desk runs, from the photographs
bundled with scikit-image via seeded random crops and flips.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

SKIMAGE_PHOTOS = (
    "camera", "moon", "coins", "text", "page", "brick",
    "grass", "gravel", "coffee", "chelsea", "astronaut", "rocket",
)

IMAGE_SUFFIXES = (".pgm", ".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")


def write_pgm(img: np.ndarray, path) -> None:
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.astype(np.uint8).tobytes())


def load_images(directory) -> list[tuple[str, np.ndarray]]:
    names = sorted(
        n for n in os.listdir(directory) if n.lower().endswith(IMAGE_SUFFIXES)
    )
    if not names:
        raise FileNotFoundError(f"no images in {directory}")
    out = []
    for name in names:
        img = Image.open(os.path.join(directory, name))
        if img.mode != "L":
            img = img.convert("L")
        out.append((name, np.asarray(img, dtype=np.uint8)))
    return out


def split_dataset(images, train_split: float = 0.8, seed: int = 0):
    """Seeded random 80/20 split."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(images))
    cut = int(round(train_split * len(images)))
    train = [images[i] for i in order[:cut]]
    held = [images[i] for i in order[cut:]]
    return train, held


def _skimage_sources() -> list[np.ndarray]:
    import skimage.data

    sources = []
    for name in SKIMAGE_PHOTOS:
        arr = getattr(skimage.data, name)()
        if arr.ndim == 3:
            img = Image.fromarray(arr).convert("L")
            arr = np.asarray(img, dtype=np.uint8)
        sources.append(arr.astype(np.uint8))
    return sources


def prepare_corpus(src: str, out_dir: str, size: int = 256, count: int = 500, seed: int = 0) -> int:
    """Populate ``out_dir`` with size x size greyscale PGMs; returns the count."""
    os.makedirs(out_dir, exist_ok=True)
    if src == "skimage":
        sources = _skimage_sources()
        rng = np.random.default_rng(seed)
        for k in range(count):
            base = sources[int(rng.integers(len(sources)))]
            h, w = base.shape
            side = int(rng.integers(min(128, h, w), min(h, w) + 1))
            top = int(rng.integers(0, h - side + 1))
            left = int(rng.integers(0, w - side + 1))
            crop = base[top : top + side, left : left + side]
            if rng.integers(2):
                crop = crop[:, ::-1]
            if rng.integers(2):
                crop = crop[::-1, :]
            img = Image.fromarray(crop).resize((size, size), Image.LANCZOS)
            write_pgm(np.asarray(img, dtype=np.uint8), os.path.join(out_dir, f"crop_{k:04d}.pgm"))
        return count

    written = 0
    for name in sorted(os.listdir(src)):
        if not name.lower().endswith(IMAGE_SUFFIXES):
            continue
        img = Image.open(os.path.join(src, name))
        if img.mode != "L":
            img = img.convert("L")
        img = img.resize((size, size), Image.LANCZOS)
        stem = os.path.splitext(name)[0]
        write_pgm(np.asarray(img, dtype=np.uint8), os.path.join(out_dir, f"{stem}.pgm"))
        written += 1
    if not written:
        raise FileNotFoundError(f"no images in {src}")
    return written
