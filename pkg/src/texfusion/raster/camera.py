"""Point projection and virtual camera focusing."""

from __future__ import annotations

import numpy as np

from ..errors import BehindCameraError
from ..scene_io import Mesh, PinholeCamera, RigidPose

BEHIND_EPS = 1e-9


def project_points(
    points: np.ndarray, camera: PinholeCamera, pose: RigidPose
) -> tuple[np.ndarray, np.ndarray]:
    """Project world points; returns (xy (N,2), view depth z (N,)).

    Points at or behind the camera plane (z <= 1e-9) get NaN coordinates;
    their view depth is still returned.
    """
    cam_pts = pose.transform(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    z = cam_pts[:, 2].copy()
    front = z > BEHIND_EPS
    xy = np.full((len(z), 2), np.nan)
    xy[front, 0] = camera.fx * cam_pts[front, 0] / z[front] + camera.cx
    xy[front, 1] = camera.fy * cam_pts[front, 1] / z[front] + camera.cy
    return xy, z


def project_vertex(
    point: np.ndarray, camera: PinholeCamera, pose: RigidPose
) -> tuple[np.ndarray, float]:
    """Scalar version of :func:`project_points` for a single position."""
    xy, z = project_points(np.asarray(point, dtype=np.float64).reshape(1, 3), camera, pose)
    return xy[0], float(z[0])


def focus_camera(
    camera: PinholeCamera, mesh: Mesh, pose: RigidPose, margin: float = 0.02
) -> PinholeCamera:
    """Virtual camera (same pixel count) zoomed onto the projected bounding box.

    The focal lengths are scaled by the smaller of the two coverage ratios so
    the bbox plus a ``margin`` fraction fits the frame, and the principal
    point is shifted to center it. Zoom never goes below 1, so the projected
    bbox pixel area never shrinks. Used only for depth rendering, never for
    sampling the real image.
    """
    corners = mesh.bbox_corners()
    xy, z = project_points(corners, camera, pose)
    front = z > BEHIND_EPS
    if not front.any():
        raise BehindCameraError("object bounding box entirely behind the camera")
    if not front.all():
        # Mixed case: the projected extent is unbounded; fall back to no zoom.
        return camera

    x0, y0 = xy.min(axis=0)
    x1, y1 = xy.max(axis=0)
    w_px = max(x1 - x0, 1e-9)
    h_px = max(y1 - y0, 1e-9)
    scale = min(camera.width / w_px, camera.height / h_px) / (1.0 + margin)
    if scale <= 1.0:
        return camera

    mid_x = 0.5 * (x0 + x1)
    mid_y = 0.5 * (y0 + y1)
    return PinholeCamera(
        fx=camera.fx * scale,
        fy=camera.fy * scale,
        cx=camera.width / 2.0 - scale * (mid_x - camera.cx),
        cy=camera.height / 2.0 - scale * (mid_y - camera.cy),
        width=camera.width,
        height=camera.height,
    )
