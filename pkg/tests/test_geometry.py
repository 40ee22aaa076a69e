import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from deskservo.geometry import (Pose7, RpyPose, Twist, compose, integrate_twist,
                                inverse, pose7_to_rpy, pose_difference,
                                rotation_angle_between, rpy_to_pose7,
                                rpy_to_rotation, rotation_to_rpy)


def random_pose(rng):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return Pose7(rng.normal(scale=0.3, size=3), axis, rng.uniform(0, np.pi))


def z_rotation(angle):
    return Pose7(np.zeros(3), np.array([0.0, 0.0, 1.0]), angle)


class TestPose7Canonicalization:
    def test_axis_is_normalized(self):
        p = Pose7(np.zeros(3), np.array([0.0, 0.0, 10.0]), 0.5)
        assert abs(np.linalg.norm(p.axis) - 1.0) < 1e-12

    def test_zero_rotation_canonical_axis(self):
        p = Pose7(np.zeros(3), np.array([0.0, 1.0, 0.0]), 0.0)
        assert np.allclose(p.axis, [1.0, 0.0, 0.0])
        assert p.angle == 0.0

    def test_angle_above_pi_maps_to_antipodal_axis(self):
        p = Pose7(np.zeros(3), np.array([0.0, 0.0, 1.0]), 1.5 * np.pi)
        assert 0.0 <= p.angle <= np.pi
        assert np.allclose(p.axis, [0.0, 0.0, -1.0])
        assert np.allclose(p.rotation(),
                           z_rotation(1.5 * np.pi - 2 * np.pi).rotation() @ np.eye(3),
                           atol=1e-12)

    def test_negative_angle_flips_axis(self):
        p = Pose7(np.zeros(3), np.array([0.0, 0.0, 1.0]), -0.5)
        assert np.allclose(p.axis, [0.0, 0.0, -1.0])
        assert abs(p.angle - 0.5) < 1e-12

    def test_canonical_represents_same_rotation(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = rng.uniform(-4 * np.pi, 4 * np.pi)
            R_in = Rotation.from_rotvec(axis * angle).as_matrix()
            p = Pose7(np.zeros(3), axis, angle)
            assert np.max(np.abs(p.rotation() - R_in)) < 1e-9
            assert 0.0 <= p.angle <= np.pi

    def test_zero_axis_with_rotation_rejected(self):
        with pytest.raises(ValueError):
            Pose7(np.zeros(3), np.zeros(3), 1.0)


class TestCompose:
    def test_identity_left_and_right(self):
        rng = np.random.default_rng(0)
        x = random_pose(rng)
        ident = Pose7.identity()
        for y in (compose(ident, x), compose(x, ident)):
            dp, da = pose_difference(x, y)
            assert dp < 1e-12 and da < 1e-12

    def test_inverse_gives_identity(self):
        rng = np.random.default_rng(1)
        x = random_pose(rng)
        dp, da = pose_difference(compose(x, inverse(x)), Pose7.identity())
        assert dp < 1e-9 and da < 1e-9

    def test_two_quarter_z_rotations(self):
        out = compose(z_rotation(np.pi / 2), z_rotation(np.pi / 2))
        dp, da = pose_difference(out, z_rotation(np.pi))
        assert dp < 1e-12 and da < 1e-9

    def test_associative_on_random_triples(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            a, b, c = (random_pose(rng) for _ in range(3))
            left = compose(compose(a, b), c)
            right = compose(a, compose(b, c))
            dp, da = pose_difference(left, right)
            assert dp < 1e-9 and da < 1e-9


class TestIntegrateTwist:
    def test_zero_twist_is_noop(self):
        rng = np.random.default_rng(3)
        x = random_pose(rng)
        y = integrate_twist(x, Twist.zero(), 0.1)
        dp, da = pose_difference(x, y)
        assert dp < 1e-12 and da < 1e-12

    def test_pure_translation(self):
        y = integrate_twist(Pose7.identity(), Twist(np.array([1.0, 0, 0]), np.zeros(3)), 0.1)
        assert np.allclose(y.position, [0.1, 0.0, 0.0])
        assert y.angle == 0.0

    def test_exact_rotation_exponential(self):
        y = integrate_twist(Pose7.identity(),
                            Twist(np.zeros(3), np.array([0.0, 0.0, np.pi])), 0.5)
        dp, da = pose_difference(y, z_rotation(np.pi / 2))
        assert dp < 1e-12 and da < 1e-12

    def test_small_dt_position_derivative_matches_linear_velocity(self):
        rng = np.random.default_rng(4)
        x = random_pose(rng)
        xdot = Twist(rng.normal(size=3), rng.normal(size=3))
        dt = 1e-6
        y = integrate_twist(x, xdot, dt)
        numeric_v = (y.position - x.position) / dt
        assert np.max(np.abs(numeric_v - xdot.linear)) < 1e-6

    def test_nonpositive_dt_rejected(self):
        with pytest.raises(ValueError):
            integrate_twist(Pose7.identity(), Twist.zero(), 0.0)


class TestRpyConversions:
    def test_zero_rpy_is_identity(self):
        p = rpy_to_pose7(RpyPose.identity())
        assert p.angle == 0.0
        assert np.allclose(p.position, 0.0)

    def test_pure_yaw(self):
        p = rpy_to_pose7(RpyPose(np.zeros(3), 0.0, 0.0, np.pi / 2))
        assert np.allclose(p.axis, [0.0, 0.0, 1.0], atol=1e-12)
        assert abs(p.angle - np.pi / 2) < 1e-12

    def test_matches_scipy_euler_convention(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            roll, pitch, yaw = rng.uniform(-np.pi, np.pi, size=3)
            ours = rpy_to_rotation(roll, pitch, yaw)
            ref = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()
            assert np.max(np.abs(ours - ref)) < 1e-12

    def test_random_round_trip_rotation_matrix(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            roll, pitch, yaw = rng.uniform(-np.pi, np.pi, size=3)
            r = RpyPose(rng.normal(size=3), roll, pitch, yaw)
            back = pose7_to_rpy(rpy_to_pose7(r))
            assert np.max(np.abs(back.rotation() - r.rotation())) < 1e-9
            assert np.allclose(back.origin, r.origin)

    def test_rpy_roundtrip_near_gimbal_lock(self):
        r = RpyPose(np.zeros(3), 0.3, np.pi / 2, -0.2)
        rebuilt = rpy_to_rotation(*rotation_to_rpy(r.rotation()))
        assert np.max(np.abs(rebuilt - r.rotation())) < 1e-9


class TestRotationHelpers:
    def test_angle_between_rotations(self):
        Ra = rpy_to_rotation(0.0, 0.0, 0.0)
        Rb = rpy_to_rotation(0.0, 0.0, 0.7)
        assert abs(rotation_angle_between(Ra, Rb) - 0.7) < 1e-12

    def test_axis_angle_recovery_near_pi(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = np.pi - 1e-9
            R = Rotation.from_rotvec(axis * angle).as_matrix()
            p = Pose7.from_rotation(R, np.zeros(3))
            assert np.max(np.abs(p.rotation() - R)) < 1e-9
