"""Forward rendering: textured color, unbiased depth, and UV rasters.

Feeds the recognition templates and serves as the synthetic-scene generator
and round-trip test oracle. Shares the texel rasterizer's fill rule, so a
pixel on a shared edge is drawn by exactly one triangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..imageops import sample_bilinear
from ..scene_io import Mesh, PinholeCamera, RigidPose
from .. import _native
from .camera import BEHIND_EPS, project_points
from .depth import DepthBuffer, depth_range
from .texture_space import uv_to_texel


@dataclass(frozen=True)
class ColorRender:
    image: np.ndarray     # (H, W, 3) float32 in [0, 1]
    depth: DepthBuffer    # unbiased normalized depth, +inf background
    uv: np.ndarray        # (H, W, 2) float32 interpolated texture coords
    coverage: np.ndarray  # (H, W) bool


def render_color(
    mesh: Mesh,
    texture: np.ndarray,
    camera: PinholeCamera,
    pose: RigidPose,
    background: float | tuple[float, float, float] = 0.0,
) -> ColorRender:
    """Render the mesh with bilinear texture sampling.

    Also emits the per-pixel interpolated UV raster (the red-green debug
    encoding is applied only when dumping to PNG) and a coverage mask.
    """
    texture = np.asarray(texture, dtype=np.float32)
    if texture.size == 0:
        raise ValueError("texture must be non-empty")
    near, far = depth_range(mesh, pose)
    xy, z = project_points(mesh.positions, camera, pose)
    tri = mesh.triangles.astype(np.int64)
    tri_ok = (z[tri] > BEHIND_EPS).all(axis=1)

    h, w = camera.height, camera.width
    out_depth = np.full((h, w), np.inf)
    out_uv = np.zeros((h, w, 2), dtype=np.float32)
    out_cover = np.zeros((h, w), dtype=np.uint8)
    _native.raster_forward(
        tri,
        np.ascontiguousarray(xy[:, 0]),
        np.ascontiguousarray(xy[:, 1]),
        z,
        np.ascontiguousarray(mesh.uvs[:, 0]),
        np.ascontiguousarray(mesh.uvs[:, 1]),
        tri_ok,
        near,
        1.0 / (far - near),
        out_depth,
        out_uv,
        out_cover,
    )
    cover = out_cover.astype(bool)

    image = np.empty((h, w, 3), dtype=np.float32)
    image[:] = np.asarray(background, dtype=np.float32)
    if cover.any():
        n = texture.shape[0]
        tx = uv_to_texel(out_uv[cover], n)
        image[cover] = sample_bilinear(texture, tx[:, 0], tx[:, 1])

    depth = DepthBuffer(values=out_depth, near=near, far=far, camera=camera)
    return ColorRender(image=image, depth=depth, uv=out_uv, coverage=cover)
