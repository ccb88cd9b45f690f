"""Reverse mapping: iterate texture-atlas texels, sample the camera image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scene_io import Mesh, PinholeCamera, RigidPose
from .. import _native
from .camera import BEHIND_EPS
from .depth import DepthBuffer, DiscontinuityMask, RasterConfig


@dataclass(frozen=True)
class TexelSampleMap:
    """Per-texel reverse-mapping record over a texture_size^2 grid.

    Where ``valid`` is set: ``image_xy`` lies inside the real camera frame,
    ``cos_incidence`` is positive, and the texel passed the biased depth test
    and the discontinuity mask of its frame.
    """

    image_xy: np.ndarray        # (N, N, 2) float32, continuous pixel coords
    depth_ndc: np.ndarray       # (N, N) float32 in [0, 1]
    cos_incidence: np.ndarray   # (N, N) float32
    valid: np.ndarray           # (N, N) bool
    degenerate_triangles: int   # zero-area UV triangles skipped
    skipped_triangles: int      # triangles behind the camera

    @property
    def texture_size(self) -> int:
        return self.valid.shape[0]


def uv_to_texel(uv: np.ndarray, texture_size: int) -> np.ndarray:
    """UV in [0,1]^2 -> continuous texel-grid coordinates (centers at ints)."""
    return np.asarray(uv, dtype=np.float64) * texture_size - 0.5


def rasterize_texture_space(
    mesh: Mesh,
    camera: PinholeCamera,
    pose: RigidPose,
    depth: DepthBuffer,
    mask: DiscontinuityMask,
    cfg: RasterConfig,
    reuse: TexelSampleMap | None = None,
) -> TexelSampleMap:
    """Build the per-texel sample map for one frame.

    ``depth`` and ``mask`` must have been rendered for this pose with the
    focused camera (carried inside ``depth``); ``camera`` is the real camera
    whose image will be sampled. Interpolation runs on UV-space barycentric
    weights, which are affine on the 3D triangle, so depth and the projected
    image coordinate are exact (perspective correct) per texel.

    ``reuse`` recycles a previous result's buffers (the returned map aliases
    them); contents are equivalent to a fresh call.
    """
    if (mask.height, mask.width) != (depth.height, depth.width):
        raise ValueError("mask dimensions must match the depth buffer")
    n = cfg.texture_size
    cam_pts = pose.transform(mesh.positions)
    cam_nrm = mesh.normals @ pose.rotation.T
    tri = mesh.triangles.astype(np.int64)
    tri_ok = (cam_pts[tri, 2] > BEHIND_EPS).all(axis=1)

    grid = uv_to_texel(mesh.uvs, n)
    if reuse is not None and reuse.texture_size == n:
        out_xy = reuse.image_xy
        out_d = reuse.depth_ndc
        out_cos = reuse.cos_incidence
        out_valid = reuse.valid.view(np.uint8)
        out_valid[:] = 0
    else:
        out_xy = np.zeros((n, n, 2), dtype=np.float32)
        out_d = np.zeros((n, n), dtype=np.float32)
        out_cos = np.zeros((n, n), dtype=np.float32)
        out_valid = np.zeros((n, n), dtype=np.uint8)

    # fuse biased depth and mask into one float32 gate raster
    gate = depth.values.astype(np.float32)
    gate[~mask.valid] = -np.inf

    fcam = depth.camera
    degenerate, behind = _native.raster_texels(
        tri,
        np.ascontiguousarray(grid[:, 0]),
        np.ascontiguousarray(grid[:, 1]),
        np.ascontiguousarray(cam_pts),
        np.ascontiguousarray(cam_nrm),
        tri_ok,
        camera.fx,
        camera.fy,
        camera.cx,
        camera.cy,
        camera.width,
        camera.height,
        fcam.fx,
        fcam.fy,
        fcam.cx,
        fcam.cy,
        gate,
        depth.near,
        1.0 / (depth.far - depth.near),
        out_xy,
        out_d,
        out_cos,
        out_valid,
    )
    return TexelSampleMap(
        image_xy=out_xy,
        depth_ndc=out_d,
        cos_incidence=out_cos,
        valid=out_valid.view(bool),
        degenerate_triangles=int(degenerate),
        skipped_triangles=int(behind),
    )
