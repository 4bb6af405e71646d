"""Regenerate the bundled grayscale test corpus from scikit-image sample data.

Every source image is public domain or CC0. Each one is converted to 8-bit luma
(ITU-R BT.601 weights), center-cropped to 256x256 and written as binary PGM.
"""
import os
import sys

import numpy as np
from skimage import data

SIZE = 256
SOURCES = {
    "astronaut": data.astronaut,
    "camera": data.camera,
    "chelsea": data.chelsea,
    "coffee": data.coffee,
    "coins": data.coins,
    "clock": data.clock,
    "rocket": data.rocket,
    "cell": data.cell,
}
TEXTURE = {"brick": data.brick}


def luma(img):
    if img.ndim == 2:
        return img.astype(np.float64)
    rgb = img[..., :3].astype(np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def crop(img):
    h, w = img.shape
    top, left = (h - SIZE) // 2, (w - SIZE) // 2
    return img[top:top + SIZE, left:left + SIZE]


def write_pgm(path, img):
    pix = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (pix.shape[1], pix.shape[0]))
        f.write(pix.tobytes())


def main(out):
    os.makedirs(os.path.join(out, "texture"), exist_ok=True)
    for name, load in SOURCES.items():
        write_pgm(os.path.join(out, name + ".pgm"), crop(luma(load())))
    for name, load in TEXTURE.items():
        write_pgm(os.path.join(out, "texture", name + ".pgm"), crop(luma(load())))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "corpus"))
