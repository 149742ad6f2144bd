import numpy as np
import pytest


def smooth_plane(rng, shape=(64, 64), block=8, noise=2.0):
    """Seeded low-frequency test image spanning the full intensity range."""
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


@pytest.fixture
def tiny_corpus(tmp_path):
    """A small PGM corpus for smoke training."""
    from pemtrainer.data import write_pgm

    rng = np.random.default_rng(17)
    d = tmp_path / "corpus"
    d.mkdir()
    for k in range(10):
        write_pgm(smooth_plane(rng, (64, 64)), d / f"img_{k:02d}.pgm")
    return d
