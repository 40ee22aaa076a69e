import numpy as np
import pytest

from deskservo.camera import CameraModel, StereoRig
from deskservo.errors import PointBehindCamera
from deskservo.geometry import Pose7


def identity_camera(f=300.0, size=(320, 240)):
    return CameraModel("test", f, f, size[0] / 2, size[1] / 2, size[0], size[1],
                       Pose7.identity())


class TestProjection:
    def test_optical_axis_hits_principal_point(self):
        cam = identity_camera()
        u, v, z = cam.project([0.0, 0.0, 1.0])
        assert (u, v) == (cam.cx, cam.cy)
        assert z == 1.0

    def test_lateral_offset(self):
        cam = identity_camera(f=300.0)
        u, v, z = cam.project([0.1, 0.0, 1.0])
        assert abs(u - 190.0) < 1e-12
        assert abs(v - 120.0) < 1e-12

    def test_behind_camera_raises(self):
        cam = identity_camera()
        with pytest.raises(PointBehindCamera):
            cam.project([0.0, 0.0, -0.5])
        with pytest.raises(PointBehindCamera):
            cam.project([0.0, 0.0, 0.0])

    def test_matches_homogeneous_matrix_oracle(self):
        rng = np.random.default_rng(11)
        rig = StereoRig.default()
        for cam in rig.cameras:
            P = cam.projection_matrix
            for _ in range(50):
                point = np.array([-0.3, 0.0, 0.05]) + rng.normal(scale=0.08, size=3)
                h = P @ np.append(point, 1.0)
                u, v, z = cam.project(point)
                assert abs(u - h[0] / h[2]) < 1e-9
                assert abs(v - h[1] / h[2]) < 1e-9
                assert abs(z - h[2]) < 1e-9

    def test_homogeneous_scale_invariance(self):
        rng = np.random.default_rng(12)
        cam = StereoRig.default().left
        P = cam.projection_matrix
        point = np.append(np.array([-0.3, 0.02, 0.08]), 1.0)
        base = P @ point
        for lam in rng.uniform(0.1, 10.0, size=20):
            scaled = P @ (lam * point)
            assert np.allclose(scaled[:2] / scaled[2], base[:2] / base[2], atol=1e-9)

    def test_project_many_matches_scalar_path(self):
        rng = np.random.default_rng(13)
        cam = StereoRig.default().left
        pts = np.array([-0.3, 0.0, 0.05]) + rng.normal(scale=0.05, size=(20, 3))
        uv, z, ok = cam.project_many(pts)
        assert ok.all()
        for i, p in enumerate(pts):
            u, v, d = cam.project(p)
            assert np.allclose(uv[i], [u, v])
            assert abs(z[i] - d) < 1e-12


class TestValidation:
    def test_focal_length_positive(self):
        with pytest.raises(ValueError):
            CameraModel("bad", -1.0, 300.0, 160, 120, 320, 240, Pose7.identity())

    def test_principal_point_inside_image(self):
        with pytest.raises(ValueError):
            CameraModel("bad", 300.0, 300.0, 400.0, 120, 320, 240, Pose7.identity())

    def test_extrinsic_rotation_orthonormal(self):
        for cam in StereoRig.default().cameras:
            R = cam.pose.rotation()
            assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-9
            assert abs(np.linalg.det(R) - 1.0) < 1e-9


class TestRig:
    def test_workspace_center_is_visible_in_both(self):
        rig = StereoRig.default()
        for cam in rig.cameras:
            u, v, z = cam.project([-0.30, 0.0, 0.05])
            assert 0 <= u <= cam.width and 0 <= v <= cam.height
            assert z > 0.1

    def test_dict_round_trip(self):
        rig = StereoRig.default()
        rebuilt = StereoRig.from_dict(rig.to_dict())
        for a, b in zip(rig.cameras, rebuilt.cameras):
            assert np.max(np.abs(a.projection_matrix - b.projection_matrix)) < 1e-9
            assert (a.width, a.height) == (b.width, b.height)

    def test_in_image_mask(self):
        cam = identity_camera()
        mask = cam.in_image(np.array([[10.0, 10.0], [-1.0, 5.0], [321.0, 5.0]]))
        assert mask.tolist() == [True, False, False]
