"""Pinhole cameras and the fixed stereo rig observing the workspace.

Extrinsics are constant per scenario: each camera stores its pose in the
root frame (camera-to-root), with the usual computer-vision camera frame
(x right, y down, z along the optical axis).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PointBehindCamera
from .geometry import Pose7

MIN_DEPTH = 1e-6


@dataclass(frozen=True, eq=False)
class CameraModel:
    """Pinhole camera with fixed intrinsics and root-frame pose."""

    name: str
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: Pose7

    def __post_init__(self):
        if self.fx <= 0.0 or self.fy <= 0.0:
            raise ValueError("focal lengths must be positive")
        if not (0.0 <= self.cx <= self.width and 0.0 <= self.cy <= self.height):
            raise ValueError("principal point must lie inside the image")

    @classmethod
    def look_at(cls, name: str, position, target, focal_px: float = 257.0,
                image_size: tuple[int, int] = (320, 240)) -> "CameraModel":
        """Camera at `position` with the optical axis through `target`.

        The image x axis is chosen horizontal (perpendicular to the root z
        axis) so the view is upright.
        """
        position = np.asarray(position, dtype=float)
        forward = np.asarray(target, dtype=float) - position
        forward = forward / np.linalg.norm(forward)
        up = np.array([0.0, 0.0, 1.0])
        if abs(float(forward @ up)) > 0.99:
            up = np.array([1.0, 0.0, 0.0])
        right = np.cross(forward, up)
        right = right / np.linalg.norm(right)
        down = np.cross(forward, right)
        R = np.column_stack([right, down, forward])
        w, h = image_size
        return cls(name, focal_px, focal_px, w / 2.0, h / 2.0, w, h,
                   Pose7.from_rotation(R, position))

    @property
    def intrinsic_matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    @property
    def projection_matrix(self) -> np.ndarray:
        """3x4 matrix taking homogeneous root-frame points to the image plane."""
        R = self.pose.rotation()
        t = -(R.T @ self.pose.position)
        return self.intrinsic_matrix @ np.hstack([R.T, t[:, None]])

    def to_camera_frame(self, points: np.ndarray) -> np.ndarray:
        """Root-frame points (3,) or (N, 3) expressed in the camera frame."""
        points = np.asarray(points, dtype=float)
        return (points - self.pose.position) @ self.pose.rotation()

    def project(self, point) -> tuple[float, float, float]:
        """Project a root-frame point; returns (u, v, depth).

        Raises PointBehindCamera when the depth is at or below MIN_DEPTH.
        """
        pc = self.to_camera_frame(point)
        z = float(pc[2])
        if z <= MIN_DEPTH:
            raise PointBehindCamera(f"{self.name}: depth {z:.2e} m")
        u = self.fx * pc[0] / z + self.cx
        v = self.fy * pc[1] / z + self.cy
        return float(u), float(v), z

    def project_many(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized projection of (..., 3) points.

        Returns (uv, depth, in_front); entries behind the camera hold
        unusable pixel values and are flagged False in `in_front`.
        """
        pc = self.to_camera_frame(points)
        z = pc[..., 2]
        in_front = z > MIN_DEPTH
        safe_z = np.where(in_front, z, 1.0)
        uv = np.stack([self.fx * pc[..., 0] / safe_z + self.cx,
                       self.fy * pc[..., 1] / safe_z + self.cy], axis=-1)
        return uv, z, in_front

    def in_image(self, uv: np.ndarray) -> np.ndarray:
        """Boolean mask of (..., 2) pixel coordinates inside the image."""
        uv = np.asarray(uv, dtype=float)
        u, v = uv[..., 0], uv[..., 1]
        return (u >= 0.0) & (u <= self.width) & (v >= 0.0) & (v <= self.height)

    def to_dict(self) -> dict:
        from .geometry import pose7_to_rpy

        r = pose7_to_rpy(self.pose)
        return {
            "fx": float(self.fx), "fy": float(self.fy),
            "cx": float(self.cx), "cy": float(self.cy),
            "image_size": [int(self.width), int(self.height)],
            "position": [float(x) for x in r.origin],
            "rpy": [float(r.roll), float(r.pitch), float(r.yaw)],
        }

    @classmethod
    def from_dict(cls, name: str, d: dict) -> "CameraModel":
        from .geometry import RpyPose, rpy_to_pose7

        w, h = d["image_size"]
        pose = rpy_to_pose7(RpyPose(np.asarray(d["position"], dtype=float),
                                    *[float(a) for a in d["rpy"]]))
        return cls(name, float(d["fx"]), float(d["fy"]), float(d["cx"]),
                   float(d["cy"]), int(w), int(h), pose)


@dataclass(frozen=True, eq=False)
class StereoRig:
    """Verged stereo pair with fixed extrinsics."""

    left: CameraModel
    right: CameraModel

    @classmethod
    def default(cls) -> "StereoRig":
        # Desk defaults: 320x240 images; 257 px focal length and 0.068 m
        # baseline are configuration placeholders, not measured values.
        target = (-0.30, 0.0, 0.05)
        return cls(
            left=CameraModel.look_at("left", (0.0, -0.034, 0.35), target),
            right=CameraModel.look_at("right", (0.0, 0.034, 0.35), target),
        )

    @property
    def cameras(self) -> tuple[CameraModel, CameraModel]:
        return self.left, self.right

    def to_dict(self) -> dict:
        return {"left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "StereoRig":
        return cls(left=CameraModel.from_dict("left", d["left"]),
                   right=CameraModel.from_dict("right", d["right"]))
