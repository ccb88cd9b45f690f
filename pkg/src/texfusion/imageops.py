"""Small image utilities: PNG IO, dtype conversion, bilinear sampling."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import EmptyImageError


def to_float(image: np.ndarray) -> np.ndarray:
    """uint8 [0,255] -> float32 [0,1]; float input is passed through as float32."""
    if image.dtype == np.uint8:
        return image.astype(np.float32) / 255.0
    return np.asarray(image, dtype=np.float32)


def to_uint8(image: np.ndarray) -> np.ndarray:
    """float [0,1] -> uint8 with round-half-away, clamped."""
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    return (arr * 255.0 + 0.5).astype(np.uint8)


def load_image_u8(path: str | Path) -> np.ndarray:
    """Load an image file as (H, W, 3) uint8 RGB."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_image_u8(image: np.ndarray, path: str | Path) -> None:
    """Save (H, W, 3) uint8 RGB or (H, W) uint8 grayscale as PNG."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        arr = to_uint8(arr)
    if arr.size == 0:
        raise EmptyImageError("refusing to save empty image")
    Image.fromarray(arr).save(path)


def sample_bilinear(image: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear sample with clamp-to-edge; pixel centers sit at integer coords.

    ``image`` is (H, W) or (H, W, C) float; ``x`` is the column coordinate,
    ``y`` the row coordinate. Output shape is x.shape (+ (C,)).
    """
    img = np.asarray(image)
    h, w = img.shape[:2]
    if h == 0 or w == 0:
        raise EmptyImageError("cannot sample empty image")

    if img.ndim == 3 and img.shape[2] == 3 and img.dtype == np.float32:
        from ._native import bilinear_rgb_points

        xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
        ys = np.ascontiguousarray(y, dtype=np.float64).ravel()
        out = np.empty((len(xs), 3), dtype=np.float32)
        bilinear_rgb_points(np.ascontiguousarray(img), xs, ys, out)
        return out.reshape(np.shape(x) + (3,))

    xf = np.clip(np.asarray(x, dtype=np.float64), 0.0, w - 1.0)
    yf = np.clip(np.asarray(y, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.floor(xf).astype(np.intp)
    y0 = np.floor(yf).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    ax = (xf - x0).astype(img.dtype if img.dtype.kind == "f" else np.float64)
    ay = (yf - y0).astype(ax.dtype)
    if img.ndim == 3:
        ax = ax[..., None]
        ay = ay[..., None]
    top = img[y0, x0] * (1.0 - ax) + img[y0, x1] * ax
    bot = img[y1, x0] * (1.0 - ax) + img[y1, x1] * ax
    return top * (1.0 - ay) + bot * ay
