"""Grasp pose computation by hand-ellipsoid / object overlap optimization.

The hand carries an ellipsoid representing its graspable volume.  A grasp
pose minimizes the volume-weighted algebraic distance between the object
surface and points sampled on the palm-side half of that ellipsoid, subject
to every sampled point staying strictly above the table plane.  Solved with
an augmented-Lagrangian outer loop over BFGS (numerical gradients), from
four flank starts around the object.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, ObjectBelowTable
from .geometry import RpyPose
from .optim import minimize_augmented_lagrangian
from .superquadric import Superquadric, _residuals_and_jacobian

DEFAULT_SAMPLES = 20
DEFAULT_CLEARANCE = 0.005


@dataclass(frozen=True, eq=False)
class HandEllipsoid:
    """Graspable-volume ellipsoid rigidly attached to the hand frame.

    The hand frame has its z axis along the palm normal; the ellipsoid
    center sits `attachment` away from the hand origin (by default 2 cm
    along +z, in front of the palm).
    """

    semi_axes: np.ndarray = (0.03, 0.05, 0.03)
    attachment: RpyPose = RpyPose(np.array([0.0, 0.0, 0.02]), 0.0, 0.0, 0.0)

    def __post_init__(self):
        a = np.array(self.semi_axes, dtype=float).reshape(3)
        if np.any(a <= 0.0):
            raise ValueError("hand ellipsoid semi-axes must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "semi_axes", a)


@dataclass(frozen=True, eq=False)
class TablePlane:
    """Plane n . p + offset = 0 with unit normal; positive side is free space."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.array(self.normal, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("table normal must be unit length")
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def horizontal(cls, height: float = 0.0) -> "TablePlane":
        return cls(np.array([0.0, 0.0, 1.0]), -height)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return points @ self.normal + self.offset


@dataclass
class GraspCandidate:
    """A locally optimal hand pose with its cost and per-point table margins."""

    pose: RpyPose
    cost: float
    constraint_margins: np.ndarray
    start_cost: float
    start_index: int

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.constraint_margins > 0.0))


def _grid_shape(count: int) -> tuple[int, int]:
    """Divisor pair (rows, cols) of `count` closest to a 1:2 aspect."""
    best = (1, count)
    for rows in range(1, count + 1):
        if count % rows:
            continue
        cols = count // rows
        if abs(cols - 2 * rows) <= abs(best[1] - 2 * best[0]):
            best = (rows, cols)
    return best


def sample_hand_points(hand: HandEllipsoid, pose: RpyPose,
                       count: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Points on the palm-side half of the hand ellipsoid, in the root frame.

    The grid is uniform in the two parametric angles (cell centers), covers
    the half with non-positive local z (the side between the ellipsoid
    center and the palm), and is rigidly carried by the hand pose.
    """
    if count < 4:
        raise ValueError("need at least 4 sample points")
    n_eta, n_omega = _grid_shape(count)
    eta = -np.pi / 2.0 + (np.arange(n_eta) + 0.5) * (np.pi / 2.0) / n_eta
    omega = -np.pi + (np.arange(n_omega) + 0.5) * 2.0 * np.pi / n_omega
    ce, se = np.cos(eta)[:, None], np.sin(eta)[:, None]
    co, so = np.cos(omega)[None, :], np.sin(omega)[None, :]
    a = hand.semi_axes
    local = np.stack([(a[0] * ce * co).ravel(),
                      (a[1] * ce * so).ravel(),
                      (a[2] * se * np.ones_like(co)).ravel()], axis=1)
    in_hand = hand.attachment.transform_points(local)
    return pose.transform_points(in_hand)


def grasp_cost(obj: Superquadric, hand: HandEllipsoid, pose: RpyPose,
               count: int = DEFAULT_SAMPLES) -> float:
    """Objective of the grasp problem at a candidate hand pose."""
    points = sample_hand_points(hand, pose, count)
    r, _ = _residuals_and_jacobian(points, obj.as_params(), with_jacobian=False)
    return float(r @ r)


def _look_at_object(position: np.ndarray, target: np.ndarray) -> RpyPose:
    """Hand pose at `position` with the palm normal (+z) through `target`."""
    z = target - position
    z = z / np.linalg.norm(z)
    up = np.array([0.0, 0.0, 1.0])
    if abs(float(z @ up)) > 0.99:
        up = np.array([1.0, 0.0, 0.0])
    x = np.cross(up, z)
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    return RpyPose.from_rotation(np.column_stack([x, y, z]), position)


def _flank_starts(obj: Superquadric, hand: HandEllipsoid, table: TablePlane,
                  count: int) -> list[RpyPose]:
    """Four starts at the +-x / +-y flanks of the object frame, palm inward."""
    center = obj.pose.origin
    R = obj.pose.rotation()
    standoff = float(np.linalg.norm(hand.attachment.origin)) + 0.01
    starts = []
    for axis_idx, sign in ((0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)):
        direction = sign * R[:, axis_idx]
        position = center + (obj.semi_axes[axis_idx] + standoff) * direction
        pose = _look_at_object(position, center)
        margins = table.signed_distance(sample_hand_points(hand, pose, count))
        lift = DEFAULT_CLEARANCE + 0.002 - float(np.min(margins))
        if lift > 0.0:
            pose = RpyPose(pose.origin + lift * table.normal,
                           pose.roll, pose.pitch, pose.yaw)
        starts.append(pose)
    return starts


def solve_grasp(obj: Superquadric, hand: HandEllipsoid, table: TablePlane,
                count: int = DEFAULT_SAMPLES,
                clearance: float = DEFAULT_CLEARANCE) -> GraspCandidate:
    """Best feasible grasp pose over the four flank starts.

    Every sampled hand point must clear the table by `clearance` meters
    (strict margins).  Deterministic: fixed start order, ties broken by
    lowest cost then lowest start index.

    Raises ObjectBelowTable when the object center violates the plane and
    Infeasible when no start yields a feasible candidate.
    """
    if float(table.signed_distance(obj.pose.origin)[0]) <= 0.0:
        raise ObjectBelowTable("object center is on or below the table plane")

    def objective(x):
        return grasp_cost(obj, hand, RpyPose.from_vector(x), count)

    def margins(x):
        pts = sample_hand_points(hand, RpyPose.from_vector(x), count)
        return table.signed_distance(pts) - clearance

    candidates: list[GraspCandidate] = []
    for idx, start in enumerate(_flank_starts(obj, hand, table, count)):
        x0 = start.as_vector()
        start_cost = objective(x0)
        result = minimize_augmented_lagrangian(objective, margins, x0)
        margin_values = margins(result.x)
        cand = GraspCandidate(pose=RpyPose.from_vector(result.x),
                              cost=float(result.objective),
                              constraint_margins=margin_values,
                              start_cost=float(start_cost),
                              start_index=idx)
        if cand.feasible and cand.cost <= cand.start_cost:
            candidates.append(cand)
    if not candidates:
        raise Infeasible("no feasible grasp from any start pose")
    return min(candidates, key=lambda c: (c.cost, c.start_index))
