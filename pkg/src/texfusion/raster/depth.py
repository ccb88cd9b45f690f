"""Biased depth rendering and depth-discontinuity masking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _native
from ..scene_io import Mesh, PinholeCamera, RigidPose
from .camera import BEHIND_EPS, project_points


@dataclass(frozen=True)
class RasterConfig:
    """Knobs of the visibility and texture-space rasterization stages."""

    depth_resolution_r: float = 2.0 / 65536.0  # two steps of a 16-bit buffer
    edge_depth_fraction: float = 0.10          # of the mesh diameter
    edge_dilation_px: int = 5
    texture_size: int = 1024

    def __post_init__(self):
        if self.depth_resolution_r <= 0:
            raise ValueError("depth_resolution_r must be positive")
        if not (0.0 < self.edge_depth_fraction < 1.0):
            raise ValueError("edge_depth_fraction must lie in (0, 1)")
        if self.texture_size < 16:
            raise ValueError("texture_size must be at least 16")


@dataclass(frozen=True)
class DepthBuffer:
    """Per-pixel view-space depth normalized to [0,1] over [near, far].

    ``values`` may carry the slope-scale bias (see render_biased_depth);
    background pixels hold +inf. The rendering camera is kept so later
    texture-space lookups can reproject into this buffer.
    """

    values: np.ndarray  # (H, W) float64, +inf where background
    near: float
    far: float
    camera: PinholeCamera

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def denormalized(self) -> np.ndarray:
        """Depth back in scene units (+inf background preserved)."""
        return self.near + self.values * (self.far - self.near)


@dataclass(frozen=True)
class DiscontinuityMask:
    """Per-pixel usability verdict; False near strong depth discontinuities."""

    valid: np.ndarray  # (H, W) bool

    @property
    def width(self) -> int:
        return self.valid.shape[1]

    @property
    def height(self) -> int:
        return self.valid.shape[0]


def depth_range(mesh: Mesh, pose: RigidPose, pad_fraction: float = 0.05) -> tuple[float, float]:
    """[near, far] = pose-transformed bbox z-extent, padded 5% per side.

    The padding keeps mesh depths strictly inside (0, 1) after normalization;
    flat meshes (zero extent) get a tiny symmetric pad so the mapping stays
    well defined.
    """
    z = pose.transform(mesh.bbox_corners())[:, 2]
    z_min, z_max = float(z.min()), float(z.max())
    extent = z_max - z_min
    pad = pad_fraction * extent + 1e-9 * max(1.0, abs(z_max))
    return z_min - pad, z_max + pad


def render_biased_depth(
    mesh: Mesh, camera: PinholeCamera, pose: RigidPose, cfg: RasterConfig
) -> DepthBuffer:
    """Z-buffered render storing normalized depth plus the slope-scale bias.

    The per-fragment bias is max(|dd/dx|, |dd/dy|) + r with the depth slopes
    taken per triangle from the screen plane through its projected vertices;
    the floor r is ``cfg.depth_resolution_r``. Nearest fragment wins on the
    unbiased depth, the bias is added on store. Triangles with any vertex at
    or behind the camera plane are skipped. Pass the focused camera here when
    the buffer feeds visibility testing.
    """
    near, far = depth_range(mesh, pose)
    inv_range = 1.0 / (far - near)
    xy, z = project_points(mesh.positions, camera, pose)
    tri = mesh.triangles.astype(np.int64)
    tri_ok = (z[tri] > BEHIND_EPS).all(axis=1)

    unbiased = np.full((camera.height, camera.width), np.inf)
    biased = np.full((camera.height, camera.width), np.inf)
    _native.raster_depth(
        tri,
        np.ascontiguousarray(xy[:, 0]),
        np.ascontiguousarray(xy[:, 1]),
        z,
        tri_ok,
        near,
        inv_range,
        cfg.depth_resolution_r,
        unbiased,
        biased,
    )
    return DepthBuffer(values=biased, near=near, far=far, camera=camera)


def discontinuity_mask(
    depth: DepthBuffer, mesh_diameter: float, cfg: RasterConfig
) -> DiscontinuityMask:
    """Mark pixels within ``edge_dilation_px`` of a depth discontinuity invalid.

    A pixel is an edge pixel when any 4-neighbor differs in denormalized depth
    by more than ``edge_depth_fraction * mesh_diameter`` or lies on the other
    side of the foreground/background boundary. The invalid region is the set
    of pixels whose Euclidean distance to an edge pixel is strictly less than
    ``edge_dilation_px``.
    """
    # compare normalized values against a normalized threshold; identical to
    # comparing denormalized depths (the buffer is an affine map of depth)
    values = depth.values
    finite = np.isfinite(values).astype(np.uint8)
    threshold = cfg.edge_depth_fraction * mesh_diameter / (depth.far - depth.near)
    valid = np.empty(values.shape, dtype=np.uint8)
    _native.edge_dilate_mask(
        values, finite, threshold, int(cfg.edge_dilation_px), valid
    )
    return DiscontinuityMask(valid=valid.view(bool))
