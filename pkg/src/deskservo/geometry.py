"""Rotations, poses and twists shared by every stage of the pipeline.

Rotation state lives in 3x3 orthonormal matrices; the axis-angle form
(`Pose7`) and the roll/pitch/yaw form (`RpyPose`) are boundary
representations converted on the way in and out.  All types are immutable
values and all operations are pure functions.

Composition convention: ``compose(a, b)`` applies ``a`` first and then ``b``,
i.e. the homogeneous product ``T_b @ T_a``.  A root-frame increment ``b``
applied to a pose ``a`` is therefore ``compose(a, b)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ZERO_ANGLE = 1e-14


def _frozen(a, shape) -> np.ndarray:
    out = np.array(a, dtype=float).reshape(shape)
    out.setflags(write=False)
    return out


def hat(w) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector: hat(w) @ v == cross(w, v)."""
    x, y, z = np.asarray(w, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_from_axis_angle(axis, angle: float) -> np.ndarray:
    """Rodrigues formula for a unit axis and an angle in radians."""
    axis = np.asarray(axis, dtype=float)
    k = hat(axis)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def rotation_from_rotvec(w) -> np.ndarray:
    """Rotation matrix for a rotation vector (axis * angle)."""
    w = np.asarray(w, dtype=float)
    angle = float(np.linalg.norm(w))
    if angle < _ZERO_ANGLE:
        # second-order series keeps tiny rotations exact enough for dt -> 0
        k = hat(w)
        return np.eye(3) + k + 0.5 * (k @ k)
    return rotation_from_axis_angle(w / angle, angle)


def quaternion_from_rotation(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0 for a rotation matrix."""
    R = np.asarray(R, dtype=float)
    t = np.trace(R)
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s, (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(0.0, 1.0 + R[i, i] - R[j, j] - R[k, k])) * 2.0
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def axis_angle_from_rotation(R: np.ndarray) -> tuple[np.ndarray, float]:
    """Canonical (unit axis, angle in [0, pi]) of a rotation matrix."""
    q = quaternion_from_rotation(R)
    vec_norm = float(np.linalg.norm(q[1:]))
    angle = 2.0 * np.arctan2(vec_norm, q[0])
    if vec_norm < _ZERO_ANGLE or angle < _ZERO_ANGLE:
        return np.array([1.0, 0.0, 0.0]), 0.0
    return q[1:] / vec_norm, angle


def rpy_to_rotation(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """ZYX convention: yaw about z, then pitch about y, then roll about x."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return rz @ ry @ rx


def rotation_to_rpy(R: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`rpy_to_rotation`; roll set to 0 at gimbal lock."""
    R = np.asarray(R, dtype=float)
    sp = -R[2, 0]
    cp = float(np.sqrt(max(0.0, 1.0 - sp * sp)))
    pitch = float(np.arctan2(sp, cp))
    if cp > 1e-9:
        roll = float(np.arctan2(R[2, 1], R[2, 2]))
        yaw = float(np.arctan2(R[1, 0], R[0, 0]))
    else:
        roll = 0.0
        yaw = float(np.arctan2(-R[0, 1], R[1, 1]))
    return roll, pitch, yaw


def rotation_angle_between(Ra: np.ndarray, Rb: np.ndarray) -> float:
    """Geodesic angle in radians between two rotations.

    Quaternion-based, so it stays accurate near both 0 and pi where the
    arccos-of-trace form loses precision.
    """
    q = quaternion_from_rotation(np.asarray(Ra) @ np.asarray(Rb).T)
    return float(2.0 * np.arctan2(np.linalg.norm(q[1:]), abs(q[0])))


def project_to_rotation(M: np.ndarray) -> np.ndarray:
    """Closest rotation matrix to M in the Frobenius sense."""
    u, _, vt = np.linalg.svd(M)
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


@dataclass(frozen=True, eq=False)
class Pose7:
    """6D pose: position plus axis-angle orientation, canonicalized.

    After construction the axis is unit length, the angle lies in [0, pi],
    and the zero rotation is stored as axis (1, 0, 0) with angle 0.
    """

    position: np.ndarray
    axis: np.ndarray
    angle: float

    def __post_init__(self):
        p = _frozen(self.position, (3,))
        axis = np.array(self.axis, dtype=float).reshape(3)
        angle = float(self.angle)
        n = float(np.linalg.norm(axis))
        angle = angle % (2.0 * np.pi)
        if angle > np.pi:
            angle = 2.0 * np.pi - angle
            axis = -axis
        if angle < _ZERO_ANGLE:
            axis, angle = np.array([1.0, 0.0, 0.0]), 0.0
        else:
            if n < 1e-12:
                raise ValueError("rotation axis has zero norm for a nonzero angle")
            axis = axis / n
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "axis", _frozen(axis, (3,)))
        object.__setattr__(self, "angle", angle)

    @classmethod
    def identity(cls) -> "Pose7":
        return cls(np.zeros(3), np.array([1.0, 0.0, 0.0]), 0.0)

    @classmethod
    def from_rotation(cls, R: np.ndarray, position) -> "Pose7":
        axis, angle = axis_angle_from_rotation(R)
        return cls(position, axis, angle)

    @classmethod
    def from_vector(cls, v) -> "Pose7":
        """Build from the flat 7-vector [px, py, pz, ux, uy, uz, angle]."""
        v = np.asarray(v, dtype=float).reshape(7)
        return cls(v[:3], v[3:6], v[6])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.axis, [self.angle]])

    def rotation(self) -> np.ndarray:
        return rotation_from_axis_angle(self.axis, self.angle)

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        """Map local points (3,) or (N, 3) into the root frame."""
        points = np.asarray(points, dtype=float)
        return points @ self.rotation().T + self.position


@dataclass(frozen=True, eq=False)
class RpyPose:
    """6D pose: origin plus ZYX roll/pitch/yaw angles in radians."""

    origin: np.ndarray
    roll: float
    pitch: float
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "origin", _frozen(self.origin, (3,)))
        object.__setattr__(self, "roll", float(self.roll))
        object.__setattr__(self, "pitch", float(self.pitch))
        object.__setattr__(self, "yaw", float(self.yaw))

    @classmethod
    def identity(cls) -> "RpyPose":
        return cls(np.zeros(3), 0.0, 0.0, 0.0)

    @classmethod
    def from_rotation(cls, R: np.ndarray, origin) -> "RpyPose":
        roll, pitch, yaw = rotation_to_rpy(R)
        return cls(origin, roll, pitch, yaw)

    @classmethod
    def from_vector(cls, v) -> "RpyPose":
        """Build from the flat 6-vector [x, y, z, roll, pitch, yaw]."""
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3], v[4], v[5])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.origin, [self.roll, self.pitch, self.yaw]])

    def rotation(self) -> np.ndarray:
        return rpy_to_rotation(self.roll, self.pitch, self.yaw)

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.rotation().T + self.origin


@dataclass(frozen=True, eq=False)
class Twist:
    """Spatial velocity [v, w]: linear in m/s, angular in rad/s."""

    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        lin = _frozen(self.linear, (3,))
        ang = _frozen(self.angular, (3,))
        if not (np.all(np.isfinite(lin)) and np.all(np.isfinite(ang))):
            raise ValueError("twist components must be finite")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "angular", ang)

    @classmethod
    def zero(cls) -> "Twist":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, v) -> "Twist":
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


def compose(a: Pose7, b: Pose7) -> Pose7:
    """Rigid composition: apply ``a`` first, then ``b`` (``T_b @ T_a``)."""
    Ra, Rb = a.rotation(), b.rotation()
    return Pose7.from_rotation(Rb @ Ra, Rb @ a.position + b.position)


def inverse(x: Pose7) -> Pose7:
    R = x.rotation()
    return Pose7.from_rotation(R.T, -(R.T @ x.position))


def integrate_twist(x: Pose7, xdot: Twist, dt: float) -> Pose7:
    """Advance a pose by a constant root-frame twist over dt seconds.

    Position moves by v*dt; orientation is left-multiplied by the exact
    rotation exponential of w*dt (rotation about the pose origin).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    R = rotation_from_rotvec(xdot.angular * dt) @ x.rotation()
    return Pose7.from_rotation(R, x.position + xdot.linear * dt)


def rpy_to_pose7(r: RpyPose) -> Pose7:
    return Pose7.from_rotation(r.rotation(), r.origin)


def pose7_to_rpy(x: Pose7) -> RpyPose:
    return RpyPose.from_rotation(x.rotation(), x.position)


def pose_difference(a: Pose7, b: Pose7) -> tuple[float, float]:
    """(position distance in meters, rotation angle in radians) from a to b."""
    dp = float(np.linalg.norm(a.position - b.position))
    da = rotation_angle_between(a.rotation(), b.rotation())
    return dp, da


def poses_close(a: Pose7, b: Pose7, pos_tol: float = 1e-9, rot_tol: float = 1e-9) -> bool:
    dp, da = pose_difference(a, b)
    return dp <= pos_tol and da <= rot_tol
