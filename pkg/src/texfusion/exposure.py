"""Frame brightness homogenization by luma statistics transfer.

Each frame's luma channel is remapped so its mean and standard deviation
match a reference frame (the first of the sequence); chrominance is carried
through untouched. The transfer is affine with non-negative slope, so pixel
luma ordering is preserved. All functions are pure and safe to run on frames
in parallel.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _native
from .errors import EmptyImageError

# BT.601 full-range luma; chroma scaled so U, V reach +-0.5 at full drive.
_WR, _WG, _WB = 0.299, 0.587, 0.114
_KU = 0.436 / (1.0 - _WB)
_KV = 0.615 / (1.0 - _WR)

FLAT_SIGMA = 1e-6


class LumaStats(NamedTuple):
    mean: float
    stddev: float


class NormalizedImage(NamedTuple):
    image: np.ndarray
    flat_input: bool  # sigma of input was below FLAT_SIGMA; mean-only shift applied


def rgb_to_yuv(image: np.ndarray) -> np.ndarray:
    """RGB [0,1] -> YUV (BT.601 full range); keeps the input float dtype."""
    img = np.asarray(image)
    if img.dtype.kind != "f":
        img = img.astype(np.float32)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    y = _WR * r + _WG * g + _WB * b
    out = np.empty_like(img)
    out[..., 0] = y
    out[..., 1] = _KU * (b - y)
    out[..., 2] = _KV * (r - y)
    return out


def yuv_to_rgb(yuv: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_yuv`; output is not clamped."""
    arr = np.asarray(yuv)
    y, u, v = arr[..., 0], arr[..., 1], arr[..., 2]
    out = np.empty_like(arr)
    b = y + u * (1.0 / _KU)
    r = y + v * (1.0 / _KV)
    out[..., 0] = r
    out[..., 1] = (y - _WR * r - _WB * b) * (1.0 / _WG)
    out[..., 2] = b
    return out


def luma_stats(image: np.ndarray) -> LumaStats:
    """Mean and (population) standard deviation of the luma channel.

    Reductions run in float64 regardless of the image dtype.
    """
    img = np.asarray(image)
    if img.size == 0:
        raise EmptyImageError("luma_stats of empty image")
    y = _WR * img[..., 0] + _WG * img[..., 1] + _WB * img[..., 2]
    mean = float(y.mean(dtype=np.float64))
    var = float(np.square(y - mean).mean(dtype=np.float64))
    return LumaStats(mean=mean, stddev=math.sqrt(max(var, 0.0)))


def transfer_luma(yuv: np.ndarray, ref: LumaStats) -> tuple[np.ndarray, bool]:
    """Replace Y with the stats transfer toward ``ref``; U, V pass through.

    Y' = (sigma_ref / sigma_in) * (Y - mu_in) + mu_ref, then clamped to [0,1].
    Flat inputs (sigma_in < FLAT_SIGMA) degenerate to a pure mean shift, since
    the scale term would blow up; the returned flag marks that case. The U and
    V planes of the result are the input's, bit for bit.
    """
    arr = np.asarray(yuv)
    if arr.size == 0:
        raise EmptyImageError("transfer_luma of empty image")
    y = arr[..., 0]
    mu = float(y.mean(dtype=np.float64))
    sigma = math.sqrt(max(float(np.square(y - mu).mean(dtype=np.float64)), 0.0))
    flat = sigma < FLAT_SIGMA
    scale = 1.0 if flat else ref.stddev / sigma
    out = arr.copy()
    out[..., 0] = np.clip(scale * (y - mu) + ref.mean, 0.0, 1.0)
    return out, flat


def normalize_luma(image: np.ndarray, ref: LumaStats) -> NormalizedImage:
    """Match an RGB image's luma statistics to ``ref``, preserving chrominance.

    Clamp policy: Y is clamped to [0,1] inside the transfer, then the result
    is converted back to RGB and clamped to [0,1]. Because the YUV transform
    is linear and only Y changes, the round trip reduces to adding the luma
    delta to all three channels; U and V are untouched by construction.
    """
    img = np.ascontiguousarray(image, dtype=np.float32)
    if img.size == 0:
        raise EmptyImageError("normalize_luma of empty image")
    out = np.empty_like(img)
    _, _, flat = _native.luma_normalize(
        img, _WR, _WG, _WB, ref.mean, ref.stddev, FLAT_SIGMA, out
    )
    return NormalizedImage(image=out, flat_input=bool(flat))
