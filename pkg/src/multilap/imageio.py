"""8-bit PNG / PPM / PGM reading and writing via Pillow."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

SUFFIXES = {".png": "PNG", ".ppm": "PPM", ".pgm": "PPM", ".pnm": "PPM"}


def read_image(path) -> np.ndarray:
    """Load an 8-bit grayscale ``(H, W)`` or RGB ``(H, W, 3)`` uint8 array."""
    with Image.open(path) as im:
        if im.mode in ("1", "L"):
            im = im.convert("L")
        elif im.mode in ("P", "RGB"):
            im = im.convert("RGB")
        else:
            raise ValueError(f"unsupported image mode {im.mode!r} (need 8-bit gray or RGB)")
        return np.asarray(im, dtype=np.uint8).copy()


def write_image(path, image: np.ndarray) -> None:
    a = np.asarray(image)
    if a.dtype != np.uint8:
        a = np.round(np.clip(a, 0.0, 1.0) * 255.0).astype(np.uint8)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[..., 0]
    path = Path(path)
    fmt = SUFFIXES.get(path.suffix.lower())
    if fmt is None:
        raise ValueError(f"unsupported output format {path.suffix!r}")
    Image.fromarray(a).save(path, format=fmt)


def signed_to_unit(layer: np.ndarray) -> np.ndarray:
    """Shift a signed detail layer by 0.5 for viewing."""
    return np.clip(layer + 0.5, 0.0, 1.0)
