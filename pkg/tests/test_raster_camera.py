import numpy as np
import pytest

from oracles import project_homogeneous
from texfusion.errors import BehindCameraError
from texfusion.primitives import make_cube, make_quad, orbit_poses
from texfusion.raster import focus_camera, project_points, project_vertex
from texfusion.scene_io import RigidPose, look_at_pose


def test_project_on_axis(camera_100, identity_pose):
    xy, z = project_vertex([0.0, 0.0, 1.0], camera_100, identity_pose)
    np.testing.assert_allclose(xy, [50.0, 50.0], atol=1e-12)
    assert z == pytest.approx(1.0)


def test_project_offset_point(camera_100, identity_pose):
    xy, z = project_vertex([0.1, 0.0, 1.0], camera_100, identity_pose)
    np.testing.assert_allclose(xy, [60.0, 50.0], atol=1e-12)
    assert z == pytest.approx(1.0)


def test_project_matches_homogeneous_oracle(camera_100):
    rng = np.random.default_rng(42)
    pose = look_at_pose([0.6, -0.9, 0.7], [0, 0, 0])
    pts = rng.normal(scale=0.2, size=(100, 3))
    # keep every point in front of the camera
    z = pose.transform(pts)[:, 2]
    pts = pts[z > 0.05]
    xy, depth = project_points(pts, camera_100, pose)
    xy_ref, z_ref = project_homogeneous(pts, camera_100, pose)
    np.testing.assert_allclose(xy, xy_ref, atol=1e-6)
    np.testing.assert_allclose(depth, z_ref, atol=1e-9)


def test_project_behind_camera_sentinel(camera_100, identity_pose):
    xy, z = project_vertex([0.0, 0.0, -1.0], camera_100, identity_pose)
    assert np.isnan(xy).all()
    assert z == pytest.approx(-1.0)


def test_focus_already_filling_is_identity(camera_100, identity_pose):
    # quad spanning well past the frame: zoom would shrink, so it is clamped
    mesh = make_quad(1.2, z=1.0)
    cam = focus_camera(camera_100, mesh, identity_pose)
    assert cam == camera_100


def test_focus_central_quarter_zooms_two_x(camera_100):
    # central 25% of the frame: half width, half height
    mesh = make_quad(0.5, z=1.0)
    pose = RigidPose(rotation=np.eye(3), translation=np.array([-0.25, -0.25, 0.0]))
    cam = focus_camera(camera_100, mesh, pose)
    assert cam.fx / camera_100.fx == pytest.approx(2.0 / 1.02, rel=1e-9)
    assert cam.fy / camera_100.fy == pytest.approx(2.0 / 1.02, rel=1e-9)
    # every bbox corner lands inside the new frame
    xy, _ = project_points(mesh.bbox_corners(), cam, pose)
    assert (xy[:, 0] >= 0).all() and (xy[:, 0] <= cam.width).all()
    assert (xy[:, 1] >= 0).all() and (xy[:, 1] <= cam.height).all()


def test_focus_behind_camera_raises(camera_100, identity_pose):
    mesh = make_quad(0.5, z=-2.0)
    with pytest.raises(BehindCameraError):
        focus_camera(camera_100, mesh, identity_pose)


def test_focus_never_shrinks_projected_area(camera_100):
    mesh = make_cube(0.2)

    def projected_area(camera, pose):
        xy, _ = project_points(mesh.bbox_corners(), camera, pose)
        w = xy[:, 0].max() - xy[:, 0].min()
        h = xy[:, 1].max() - xy[:, 1].min()
        return w * h

    for i, pose in enumerate(orbit_poses(7, 0.9, 20.0)):
        focused = focus_camera(camera_100, mesh, pose)
        assert projected_area(focused, pose) >= projected_area(camera_100, pose) - 1e-9, i
