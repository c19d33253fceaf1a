"""PNG/PGM reading and 8-bit PNG writing."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")


def read_image(path) -> np.ndarray:
    """Load an image as float64 in [0, 1]: HxW for gray, HxWx3 for color."""
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I", "F", "1"):
            arr = np.asarray(im, dtype=np.float64)
            peak = {"1": 1.0, "L": 255.0, "I;16": 65535.0}.get(im.mode, max(float(arr.max()), 1.0))
            return arr / peak
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def to_uint8(img) -> np.ndarray:
    return np.clip(np.rint(np.asarray(img, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def write_png(path, img) -> None:
    arr = to_uint8(img)
    Image.fromarray(arr, mode="L" if arr.ndim == 2 else "RGB").save(path, format="PNG", optimize=False)


def list_images(directory) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
