#!/usr/bin/env python3
"""Prepare the USC-SIPI evaluation corpus for the acceptance suite.

The three standard images are not redistributable, so download them
yourself from https://sipi.usc.edu/database/ ('miscellaneous' volume):

    4.2.05  airplane (F-16)   -> aeroplane
    4.2.03  mandrill (baboon) -> mandrill
    lena    (4.2.04)          -> lena

Then run

    python3 scripts/prepare_usc_sipi.py 4.2.05.tiff=aeroplane \
        4.2.03.tiff=mandrill 4.2.04.tiff=lena --out tests/data/usc_sipi

Each input is converted to greyscale (ITU-R 601 luma, Pillow 'L' mode),
resized to 256x256 with Lanczos resampling, and written as binary PGM.
"""

import argparse
import os
import sys

import numpy as np
from PIL import Image


def convert(src: str, dst: str, size: int) -> None:
    img = Image.open(src)
    if img.mode != "L":
        img = img.convert("L")
    img = img.resize((size, size), Image.LANCZOS)
    arr = np.asarray(img, dtype=np.uint8)
    with open(dst, "wb") as f:
        f.write(f"P5\n{size} {size}\n255\n".encode("ascii"))
        f.write(arr.tobytes())
    print(f"{src} -> {dst}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("mappings", nargs="+", help="<source-image>=<corpus-name>")
    parser.add_argument("--out", default="tests/data/usc_sipi")
    parser.add_argument("--size", type=int, default=256)
    args = parser.parse_args(argv)

    os.makedirs(args.out, exist_ok=True)
    for mapping in args.mappings:
        if "=" not in mapping:
            parser.error(f"expected <source>=<name>, got {mapping!r}")
        src, name = mapping.rsplit("=", 1)
        convert(src, os.path.join(args.out, f"{name}.pgm"), args.size)
    return 0


if __name__ == "__main__":
    sys.exit(main())
