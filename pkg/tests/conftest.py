import numpy as np
import pytest

from texfusion.scene_io import PinholeCamera, RigidPose


@pytest.fixture
def identity_pose():
    return RigidPose(rotation=np.eye(3), translation=np.zeros(3))


@pytest.fixture
def camera_100():
    """Small square camera with fx=fy=100, principal point at (50, 50)."""
    return PinholeCamera(fx=100.0, fy=100.0, cx=50.0, cy=50.0, width=100, height=100)


@pytest.fixture
def camera_vga():
    return PinholeCamera(fx=525.0, fy=525.0, cx=319.5, cy=239.5, width=640, height=480)
