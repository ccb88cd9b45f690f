"""Projection and rasterization: camera focusing, biased depth rendering,
discontinuity masking, texture-space sampling, and the forward color renderer.

All operations are pure functions of their inputs.
"""

from .camera import focus_camera, project_points, project_vertex
from .depth import (
    DepthBuffer,
    DiscontinuityMask,
    RasterConfig,
    depth_range,
    discontinuity_mask,
    render_biased_depth,
)
from .forward import ColorRender, render_color
from .texture_space import TexelSampleMap, rasterize_texture_space, uv_to_texel

__all__ = [
    "ColorRender",
    "DepthBuffer",
    "DiscontinuityMask",
    "RasterConfig",
    "TexelSampleMap",
    "depth_range",
    "discontinuity_mask",
    "focus_camera",
    "project_points",
    "project_vertex",
    "rasterize_texture_space",
    "render_biased_depth",
    "render_color",
    "uv_to_texel",
]
