"""Desk-scale markerless visual servoing pipeline.

Stages: superquadric modeling of an observed object, grasp-pose
optimization against the table, particle-filter correction of biased
proprioception, and a decoupled stereo image-based servo loop driving a
simulated kinematic end-effector.
"""

from .geometry import (Pose7, RpyPose, Twist, compose, integrate_twist, inverse,
                       pose7_to_rpy, rpy_to_pose7)
from .camera import CameraModel, StereoRig
from .superquadric import (PointCloud, Superquadric, fit_superquadric,
                           inside_outside, sample_surface)

__version__ = "0.1.0"

__all__ = [
    "Pose7", "RpyPose", "Twist", "compose", "inverse", "integrate_twist",
    "rpy_to_pose7", "pose7_to_rpy",
    "CameraModel", "StereoRig",
    "Superquadric", "PointCloud", "inside_outside", "sample_surface",
    "fit_superquadric",
    "__version__",
]
