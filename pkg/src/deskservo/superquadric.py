"""Superquadric (superellipsoid) models: evaluation, sampling and recovery.

A model is 11 parameters: three semi-axes in meters, two shape exponents,
and a 6D pose of the object-centered frame.  The implicit field equals 1 on
the surface, is below 1 inside and above 1 outside.  Recovery minimizes the
volume-weighted algebraic distance

    sum_i ( sqrt(a1*a2*a3) * (F(m_i) - 1) )^2

with an in-repo Levenberg-Marquardt solver over smoothly reparameterized
(bounded) parameters.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateCloud, EmptyCloud, FitDiverged
from .geometry import RpyPose, rpy_to_rotation
from .optim import LMResult, levenberg_marquardt

AXIS_BOUNDS = (0.005, 0.5)
EXPONENT_BOUNDS = (0.1, 1.9)
MIN_FIT_POINTS = 30
MIN_CLOUD_DIAMETER = 0.01


@dataclass(frozen=True, eq=False)
class Superquadric:
    """Semi-axes (m), shape exponents (meridian, cross-section), and pose."""

    semi_axes: np.ndarray
    exponents: np.ndarray
    pose: RpyPose

    def __post_init__(self):
        a = np.array(self.semi_axes, dtype=float).reshape(3)
        e = np.array(self.exponents, dtype=float).reshape(2)
        if np.any(a < AXIS_BOUNDS[0]) or np.any(a > AXIS_BOUNDS[1]):
            raise ValueError(f"semi-axes {a} outside {AXIS_BOUNDS} m")
        if np.any(e < EXPONENT_BOUNDS[0]) or np.any(e > EXPONENT_BOUNDS[1]):
            raise ValueError(f"exponents {e} outside {EXPONENT_BOUNDS}")
        a.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "semi_axes", a)
        object.__setattr__(self, "exponents", e)

    @property
    def volume_factor(self) -> float:
        """sqrt of the semi-axis product; scales the fit residuals."""
        return float(np.sqrt(np.prod(self.semi_axes)))

    def as_params(self) -> np.ndarray:
        """Flat 11-vector [a1 a2 a3 e1 e2 x y z roll pitch yaw]."""
        return np.concatenate([self.semi_axes, self.exponents, self.pose.as_vector()])

    @classmethod
    def from_params(cls, params: np.ndarray) -> "Superquadric":
        params = np.asarray(params, dtype=float).reshape(11)
        return cls(params[:3], params[3:5], RpyPose.from_vector(params[5:]))

    def to_dict(self) -> dict:
        return {
            "semi_axes": [float(v) for v in self.semi_axes],
            "exponents": [float(v) for v in self.exponents],
            "position": [float(v) for v in self.pose.origin],
            "rpy": [float(self.pose.roll), float(self.pose.pitch), float(self.pose.yaw)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Superquadric":
        pose = RpyPose(np.asarray(d["position"], dtype=float), *[float(v) for v in d["rpy"]])
        return cls(np.asarray(d["semi_axes"], dtype=float),
                   np.asarray(d["exponents"], dtype=float), pose)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Root-frame 3D points in meters."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 3)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal, used as the cloud-size measure."""
        if len(self) == 0:
            return 0.0
        return float(np.linalg.norm(self.points.max(axis=0) - self.points.min(axis=0)))

    def save_xyz(self, path) -> None:
        with open(path, "w") as fh:
            for p in self.points:
                fh.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")

    @classmethod
    def load_xyz(cls, path) -> "PointCloud":
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.split()[:3]])
        return cls(np.asarray(rows, dtype=float))


def _field_terms(t: np.ndarray, a: np.ndarray, e: np.ndarray):
    """Implicit field pieces for object-frame points t of shape (N, 3)."""
    u = np.abs(t[:, 0]) / a[0]
    v = np.abs(t[:, 1]) / a[1]
    w = np.abs(t[:, 2]) / a[2]
    A = u ** (2.0 / e[1])
    B = v ** (2.0 / e[1])
    C = w ** (2.0 / e[0])
    S = A + B
    P = S ** (e[1] / e[0])
    return u, v, w, A, B, C, S, P


def _object_frame(sq: Superquadric, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    R = sq.pose.rotation()
    d = pts - sq.pose.origin
    return d @ R, d, R


def inside_outside(sq: Superquadric, points: np.ndarray):
    """Implicit field F; 1 on the surface, <1 inside, >1 outside.

    Accepts a single point (3,) or a batch (N, 3); bases are taken in
    absolute value so fractional exponents are defined everywhere (and
    F = 0 at the frame origin).
    """
    t, _, _ = _object_frame(sq, points)
    _, _, _, _, _, C, _, P = _field_terms(t, sq.semi_axes, sq.exponents)
    F = P + C
    if np.asarray(points).ndim == 1:
        return float(F[0])
    return F


def _field_gradients(t: np.ndarray, a: np.ndarray, e: np.ndarray):
    """F plus its partials wrt object-frame point, semi-axes and exponents.

    Products that become 0 * log(0) at coordinate planes are masked to
    their continuous limit (zero).
    """
    u, v, w, A, B, C, S, P = _field_terms(t, a, e)
    F = P + C
    sgn = np.sign(t)

    with np.errstate(divide="ignore", invalid="ignore"):
        dPdS = np.where(S > 0.0, (e[1] / e[0]) * S ** (e[1] / e[0] - 1.0), 0.0)
        dA_du = (2.0 / e[1]) * u ** (2.0 / e[1] - 1.0)
        dB_dv = (2.0 / e[1]) * v ** (2.0 / e[1] - 1.0)
        dC_dw = (2.0 / e[0]) * w ** (2.0 / e[0] - 1.0)

        gx = dPdS * dA_du * sgn[:, 0] / a[0]
        gy = dPdS * dB_dv * sgn[:, 1] / a[1]
        gz = dC_dw * sgn[:, 2] / a[2]
        g_t = np.stack([gx, gy, gz], axis=1)

        g_a = np.stack([-(t[:, 0] / a[0]) * gx,
                        -(t[:, 1] / a[1]) * gy,
                        -(t[:, 2] / a[2]) * gz], axis=1)

        lnS = np.where(S > 0.0, np.log(np.maximum(S, 1e-300)), 0.0)
        lnu = np.where(u > 0.0, np.log(np.maximum(u, 1e-300)), 0.0)
        lnv = np.where(v > 0.0, np.log(np.maximum(v, 1e-300)), 0.0)
        lnw = np.where(w > 0.0, np.log(np.maximum(w, 1e-300)), 0.0)

        dF_de1 = -(e[1] / e[0] ** 2) * P * lnS - (2.0 / e[0] ** 2) * C * lnw
        dS_de2 = (-2.0 / e[1] ** 2) * (A * lnu + B * lnv)
        dP_de2 = np.where(S > 0.0,
                          P * (lnS / e[0] + (e[1] / e[0]) * dS_de2 / np.maximum(S, 1e-300)),
                          0.0)
        g_e = np.stack([dF_de1, dP_de2], axis=1)

    g_t = np.nan_to_num(g_t, nan=0.0, posinf=0.0, neginf=0.0)
    g_a = np.nan_to_num(g_a, nan=0.0, posinf=0.0, neginf=0.0)
    g_e = np.nan_to_num(g_e, nan=0.0, posinf=0.0, neginf=0.0)
    return F, g_t, g_a, g_e


def surface_normals(sq: Superquadric, points: np.ndarray) -> np.ndarray:
    """Outward unit normals (root frame) at points on or near the surface."""
    t, _, R = _object_frame(sq, points)
    _, g_t, _, _ = _field_gradients(t, sq.semi_axes, sq.exponents)
    n_obj = g_t / np.maximum(np.linalg.norm(g_t, axis=1, keepdims=True), 1e-300)
    return n_obj @ R.T


def _signed_power(base: np.ndarray, p: float) -> np.ndarray:
    return np.sign(base) * np.abs(base) ** p


def sample_surface(sq: Superquadric, n_eta: int, n_omega: int,
                   visibility=None) -> PointCloud:
    """Sample the surface on a parametric grid (cell centers, no poles).

    `visibility`, when given, is a root-frame direction pointing toward the
    camera; only points whose outward normal faces it are kept, which
    produces the partial clouds a single viewpoint would see.
    """
    if n_eta < 2 or n_omega < 2:
        raise ValueError("need at least 2 samples per parametric angle")
    e1, e2 = sq.exponents
    eta = -np.pi / 2.0 + (np.arange(n_eta) + 0.5) * np.pi / n_eta
    omega = -np.pi + (np.arange(n_omega) + 0.5) * 2.0 * np.pi / n_omega
    ce, se = np.cos(eta)[:, None], np.sin(eta)[:, None]
    co, so = np.cos(omega)[None, :], np.sin(omega)[None, :]
    x = sq.semi_axes[0] * _signed_power(ce, e1) * _signed_power(co, e2)
    y = sq.semi_axes[1] * _signed_power(ce, e1) * _signed_power(so, e2)
    z = sq.semi_axes[2] * _signed_power(se, e1) * np.ones_like(co)
    local = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    points = sq.pose.transform_points(local)
    if visibility is not None:
        view = np.asarray(visibility, dtype=float)
        view = view / np.linalg.norm(view)
        keep = surface_normals(sq, points) @ view > 0.0
        if not np.any(keep):
            raise EmptyCloud("visibility direction culled every surface sample")
        points = points[keep]
    return PointCloud(points)


@dataclass
class FitReport:
    cost: float
    iterations: int
    residual_rms: float
    gradient_norm: float
    status: str


def _rpy_derivatives(roll: float, pitch: float, yaw: float) -> list[np.ndarray]:
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    drz = np.array([[-sy, -cy, 0.0], [cy, -sy, 0.0], [0.0, 0.0, 0.0]])
    dry = np.array([[-sp, 0.0, cp], [0.0, 0.0, 0.0], [-cp, 0.0, -sp]])
    drx = np.array([[0.0, 0.0, 0.0], [0.0, -sr, -cr], [0.0, cr, -sr]])
    return [rz @ ry @ drx, rz @ dry @ rx, drz @ ry @ rx]


def _residuals_and_jacobian(points: np.ndarray, params: np.ndarray,
                            with_jacobian: bool = True):
    """Residuals r_i = sqrt(a1 a2 a3) (F_i - 1) and their 11-column Jacobian."""
    a, e, c = params[:3], params[3:5], params[5:8]
    roll, pitch, yaw = params[8], params[9], params[10]
    R = rpy_to_rotation(roll, pitch, yaw)
    d = points - c
    t = d @ R
    vol = float(np.sqrt(np.prod(a)))
    if not with_jacobian:
        _, _, _, _, _, C, _, P = _field_terms(t, a, e)
        return vol * (P + C - 1.0), None
    F, g_t, g_a, g_e = _field_gradients(t, a, e)
    r = vol * (F - 1.0)
    J = np.empty((points.shape[0], 11))
    J[:, 0:3] = vol * g_a + (F - 1.0)[:, None] * (vol / (2.0 * a))[None, :]
    J[:, 3:5] = vol * g_e
    J[:, 5:8] = vol * (-(g_t @ R.T))
    for k, dR in enumerate(_rpy_derivatives(roll, pitch, yaw)):
        J[:, 8 + k] = vol * np.einsum("ni,ni->n", g_t, d @ dR)
    return r, J


def fit_cost(cloud: PointCloud, sq: Superquadric) -> float:
    """Volume-weighted algebraic-distance cost of a model on a cloud."""
    r, _ = _residuals_and_jacobian(cloud.points, sq.as_params(), with_jacobian=False)
    return float(r @ r)


def fit_cost_gradient(cloud: PointCloud, sq: Superquadric) -> np.ndarray:
    """Analytic gradient of :func:`fit_cost` wrt the 11 raw parameters."""
    r, J = _residuals_and_jacobian(cloud.points, sq.as_params())
    return 2.0 * (J.T @ r)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def _to_raw(u: np.ndarray) -> np.ndarray:
    """Unconstrained internal vector -> raw bounded parameters."""
    lo_a, hi_a = np.log(AXIS_BOUNDS[0]), np.log(AXIS_BOUNDS[1])
    lo_e, hi_e = EXPONENT_BOUNDS
    raw = np.empty(11)
    raw[:3] = np.exp(lo_a + (hi_a - lo_a) * _sigmoid(u[:3]))
    raw[3:5] = lo_e + (hi_e - lo_e) * _sigmoid(u[3:5])
    raw[5:] = u[5:]
    return raw


def _to_internal(params: np.ndarray) -> np.ndarray:
    lo_a, hi_a = np.log(AXIS_BOUNDS[0]), np.log(AXIS_BOUNDS[1])
    lo_e, hi_e = EXPONENT_BOUNDS
    u = np.empty(11)
    fa = np.clip((np.log(params[:3]) - lo_a) / (hi_a - lo_a), 1e-6, 1.0 - 1e-6)
    fe = np.clip((params[3:5] - lo_e) / (hi_e - lo_e), 1e-6, 1.0 - 1e-6)
    u[:3] = np.log(fa / (1.0 - fa))
    u[3:5] = np.log(fe / (1.0 - fe))
    u[5:] = params[5:]
    return u


def _chain_factors(u: np.ndarray) -> np.ndarray:
    """d(raw)/d(internal) for each coordinate."""
    lo_a, hi_a = np.log(AXIS_BOUNDS[0]), np.log(AXIS_BOUNDS[1])
    lo_e, hi_e = EXPONENT_BOUNDS
    raw = _to_raw(u)
    s_a = _sigmoid(u[:3])
    s_e = _sigmoid(u[3:5])
    f = np.ones(11)
    f[:3] = raw[:3] * (hi_a - lo_a) * s_a * (1.0 - s_a)
    f[3:5] = (hi_e - lo_e) * s_e * (1.0 - s_e)
    return f


def _initial_guess(points: np.ndarray) -> np.ndarray:
    centroid = points.mean(axis=0)
    d = points - centroid
    cov = (d.T @ d) / len(points)
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] < 1e-18:
        raise DegenerateCloud("cloud is collinear or coplanar; covariance is rank-deficient")
    order = np.argsort(evals)[::-1]
    R0 = evecs[:, order]
    if np.linalg.det(R0) < 0:
        R0[:, 2] = -R0[:, 2]
    proj = d @ R0
    half = 0.5 * (proj.max(axis=0) - proj.min(axis=0))
    half = np.clip(half, AXIS_BOUNDS[0] * 1.2, AXIS_BOUNDS[1] * 0.9)
    pose = RpyPose.from_rotation(R0, centroid)
    return np.concatenate([half, [1.0, 1.0], pose.as_vector()])


def fit_superquadric(cloud: PointCloud, noise_floor: float = 0.0,
                     max_iter: int = 200) -> tuple[Superquadric, FitReport]:
    """Recover an 11-parameter model from a (possibly partial) point cloud.

    Initialization is the centroid plus PCA axes ordered by extent, with
    half-ranges for the semi-axes and unit exponents.  `noise_floor` is the
    per-point 3D noise level in meters; when positive, iteration stops once
    the cost is consistent with it.

    Raises DegenerateCloud for rank-deficient clouds and FitDiverged when
    the iteration cap is hit before any convergence criterion.
    """
    points = cloud.points
    if len(cloud) < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} points, got {len(cloud)}")
    if cloud.diameter < MIN_CLOUD_DIAMETER:
        raise ValueError(f"cloud diameter {cloud.diameter:.4f} m below {MIN_CLOUD_DIAMETER} m")
    params0 = _initial_guess(points)
    u0 = _to_internal(params0)

    cost_floor = 0.0
    if noise_floor > 0.0:
        # residual scale ~ vol * |grad F| * sigma with |grad F| ~ 2 / mean axis
        vol0 = float(np.sqrt(np.prod(params0[:3])))
        scale = vol0 * 2.0 / float(np.exp(np.mean(np.log(params0[:3]))))
        cost_floor = len(cloud) * (scale * noise_floor) ** 2

    def residuals(u):
        r, _ = _residuals_and_jacobian(points, _to_raw(u), with_jacobian=False)
        return r

    def jacobian(u):
        _, J = _residuals_and_jacobian(points, _to_raw(u))
        return J * _chain_factors(u)[None, :]

    result: LMResult = levenberg_marquardt(residuals, jacobian, u0,
                                           max_iter=max_iter, gtol=1e-10,
                                           cost_floor=cost_floor)
    if result.status == "max_iter":
        raise FitDiverged(f"no convergence in {max_iter} iterations "
                          f"(gradient norm {result.gradient_norm:.2e})")
    sq = Superquadric.from_params(_to_raw(result.x))
    report = FitReport(cost=result.cost, iterations=result.iterations,
                       residual_rms=float(np.sqrt(result.cost / len(cloud))),
                       gradient_norm=result.gradient_norm, status=result.status)
    return sq, report
