"""Merging per-frame texel observations into the persistent surface texture.

Each frame contributes an increment patch: the texels it observed, with a
color, a quality score (incidence cosine times closeness to camera), and a
blend weight that ramps down toward the patch boundary. Two accumulation
strategies are provided, both backed by a single RGBA-style buffer
(color + scalar): a streaming weighted mean, and best-view selection with
boundary blending. During a merge the accumulator is exclusively owned;
texel updates are independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ._native import chamfer_5x5, extract_patch, merge_argmax_kernel, merge_mean_kernel
from .raster.texture_space import TexelSampleMap

BLEND_RAMP_TEXELS = 5.0

MergeMode = Literal["mean", "argmax"]


def texel_score(cos_alpha, depth_ndc):
    """Observation quality: max(cos(alpha), 0) * (1 - d).

    ``d`` is the normalized view depth in [0, 1]; backfacing observations
    score zero. Accepts scalars or arrays.
    """
    return np.maximum(cos_alpha, 0.0) * (1.0 - np.asarray(depth_ndc, dtype=np.float64))


@dataclass
class IncrementPatch:
    """One frame's worth of texel observations, prior to merging."""

    color: np.ndarray         # (N, N, 3) float32
    score: np.ndarray         # (N, N) float32 in [0, 1]
    present: np.ndarray       # (N, N) bool
    blend_weight: np.ndarray  # (N, N) float32; 0 where not present

    @property
    def texture_size(self) -> int:
        return self.present.shape[0]


@dataclass
class TextureAccumulator:
    """Persistent texture: per-texel color plus one scalar.

    In ``mean`` mode the scalar is the running score sum of the weighted
    average; in ``argmax`` mode it is the best score seen so far.
    ``scalar == 0`` exactly marks never-observed texels.
    """

    size: int
    mode: MergeMode
    color: np.ndarray = field(init=False)
    scalar: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.mode not in ("mean", "argmax"):
            raise ValueError(f"unknown merge mode {self.mode!r}")
        self.color = np.zeros((self.size, self.size, 3), dtype=np.float64)
        self.scalar = np.zeros((self.size, self.size), dtype=np.float64)

    @property
    def observed(self) -> np.ndarray:
        return self.scalar > 0.0

    def merge(self, patch: IncrementPatch) -> None:
        if self.mode == "mean":
            merge_mean(self, patch)
        else:
            merge_argmax(self, patch)


def extract_increment(
    frame: np.ndarray, samples: TexelSampleMap, reuse: IncrementPatch | None = None
) -> IncrementPatch:
    """Sample the (exposure-normalized) frame at each valid texel.

    Colors come from bilinear lookups at the sub-pixel image coordinates;
    scores follow :func:`texel_score`. Blend weights start at 1 and are
    shaped later by :func:`blend_boundaries`. Passing ``reuse`` recycles a
    previous patch's buffers (the result aliases them).
    """
    frame = np.ascontiguousarray(frame, dtype=np.float32)
    n = samples.texture_size
    if reuse is not None and reuse.texture_size == n:
        patch = reuse
        np.copyto(patch.present, samples.valid)
    else:
        patch = IncrementPatch(
            color=np.zeros((n, n, 3), dtype=np.float32),
            score=np.zeros((n, n), dtype=np.float32),
            present=samples.valid.copy(),
            blend_weight=np.zeros((n, n), dtype=np.float32),
        )
    extract_patch(
        frame,
        samples.image_xy,
        samples.depth_ndc,
        samples.cos_incidence,
        patch.present.view(np.uint8),
        patch.color,
        patch.score,
    )
    np.copyto(patch.blend_weight, patch.present)
    return patch


def boundary_distance(present: np.ndarray) -> np.ndarray:
    """Chamfer (5x5, L2 weights) distance in texels to the nearest absent texel.

    A patch covering the whole texture has no boundary; all distances come
    back large. Texels outside the patch get distance 0.
    """
    big = 1e30
    dist = np.where(present, big, 0.0).astype(np.float64)
    chamfer_5x5(dist)
    return dist


def blend_boundaries(patch: IncrementPatch, ramp: float = BLEND_RAMP_TEXELS) -> IncrementPatch:
    """Set blend weights to min(D / ramp, 1) with D the boundary distance.

    The ramp is linear in texture space; texels at least ``ramp`` texels
    inside the patch keep weight 1. Weights are written into the patch in
    place and the same patch is returned.

    The transform runs on the patch bounding box padded by one absent ring,
    which leaves the distances of present texels unchanged (any path to an
    absent texel outside the box crosses the ring first).
    """
    present = patch.present
    weight = patch.blend_weight
    if present.any() and not present.all():
        rows = np.flatnonzero(present.any(axis=1))
        cols = np.flatnonzero(present.any(axis=0))
        n = present.shape[0]
        y0, y1 = max(rows[0] - 1, 0), min(rows[-1] + 2, n)
        x0, x1 = max(cols[0] - 1, 0), min(cols[-1] + 2, n)
        crop = np.ascontiguousarray(present[y0:y1, x0:x1])
        dist = np.where(crop, np.float32(1e30), np.float32(0.0))
        chamfer_5x5(dist)
        np.minimum(dist / np.float32(ramp), 1.0, out=dist)
        weight[:] = 0.0
        weight[y0:y1, x0:x1] = np.where(crop, dist, 0.0)
    else:
        np.copyto(weight, present)
    return patch


def merge_mean(acc: TextureAccumulator, patch: IncrementPatch) -> TextureAccumulator:
    """Streaming weighted mean: c <- (a*c + s'*c_new) / (a + s'), a <- a + s'.

    The effective score s' is the patch score times its blend weight;
    zero-score observations are skipped. Algebraically identical to the batch
    weighted mean, so the merge order does not matter.
    """
    if acc.mode != "mean":
        raise ValueError("merge_mean requires a mean-mode accumulator")
    merge_mean_kernel(
        acc.color,
        acc.scalar,
        patch.color,
        patch.score,
        patch.blend_weight,
        patch.present.view(np.uint8),
    )
    return acc


def merge_argmax(acc: TextureAccumulator, patch: IncrementPatch) -> TextureAccumulator:
    """Best-view update with boundary blending.

    Where the new score beats the stored one, color and score are linearly
    interpolated toward the new observation by the blend weight w:
    c <- (1-w)c + w*c_new, a <- (1-w)a + w*s. Never-observed texels take the
    new observation outright regardless of w. Ties keep the old value.
    """
    if acc.mode != "argmax":
        raise ValueError("merge_argmax requires an argmax-mode accumulator")
    merge_argmax_kernel(
        acc.color,
        acc.scalar,
        patch.color,
        patch.score,
        patch.blend_weight,
        patch.present.view(np.uint8),
    )
    return acc
