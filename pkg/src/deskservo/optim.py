"""Small local optimizers: damped least squares and an augmented Lagrangian.

Both are deliberately plain so the cost functions they minimize stay
verbatim in the calling modules.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    gradient_norm: float
    iterations: int
    status: str  # one of: gtol, xtol, ftol, cost_floor, max_iter


def levenberg_marquardt(residuals: Callable[[np.ndarray], np.ndarray],
                        jacobian: Callable[[np.ndarray], np.ndarray],
                        x0: np.ndarray,
                        max_iter: int = 200,
                        gtol: float = 1e-9,
                        xtol: float = 1e-12,
                        ftol: float = 1e-12,
                        cost_floor: float = 0.0,
                        tau: float = 1e-3) -> LMResult:
    """Minimize sum(r(x)**2) with adaptive diagonal damping.

    `gtol` bounds the infinity norm of J^T r, `xtol` the step size, `ftol`
    the relative cost decrease on accepted steps.  `cost_floor` allows an
    early exit once the cost is consistent with a known noise level.
    """
    x = np.array(x0, dtype=float)
    r = residuals(x)
    cost = float(r @ r)
    J = jacobian(x)
    H = J.T @ J
    g = J.T @ r
    mu = tau * float(np.max(np.diag(H))) if np.max(np.diag(H)) > 0 else tau
    nu = 2.0
    status = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) < gtol:
            status = "gtol"
            break
        if cost <= cost_floor:
            status = "cost_floor"
            break
        step = np.linalg.solve(H + mu * np.eye(len(x)), -g)
        if np.linalg.norm(step) < xtol * (np.linalg.norm(x) + xtol):
            status = "xtol"
            break
        x_new = x + step
        r_new = residuals(x_new)
        cost_new = float(r_new @ r_new)
        predicted = float(step @ (mu * step - g))
        rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
        if rho > 0.0:
            accepted_drop = cost - cost_new
            x, r, cost = x_new, r_new, cost_new
            J = jacobian(x)
            H = J.T @ J
            g = J.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            if accepted_drop < ftol * max(cost, 1e-300):
                status = "ftol"
                break
        else:
            mu *= nu
            nu *= 2.0
    return LMResult(x=x, cost=cost, gradient_norm=float(np.max(np.abs(g))),
                    iterations=it, status=status)


def central_difference_gradient(f: Callable[[np.ndarray], float],
                                x: np.ndarray,
                                step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (f(xp) - f(xm)) / (2.0 * step)
    return g


@dataclass
class AugLagResult:
    x: np.ndarray
    objective: float
    max_violation: float
    outer_iterations: int


def minimize_augmented_lagrangian(objective: Callable[[np.ndarray], float],
                                  inequalities: Callable[[np.ndarray], np.ndarray],
                                  x0: np.ndarray,
                                  rho0: float = 10.0,
                                  max_outer: int = 10,
                                  inner_maxiter: int = 300,
                                  gradient_step: float = 1e-6) -> AugLagResult:
    """Minimize `objective` subject to inequalities(x) > 0 elementwise.

    Classic multiplier method: a BFGS inner solve of the augmented
    Lagrangian (numerical central-difference gradients), a multiplier
    update per outer iteration, and a penalty increase whenever the
    constraint violation fails to shrink by 4x.
    """
    x = np.array(x0, dtype=float)
    m = np.asarray(inequalities(x)).size
    mu = np.zeros(m)
    rho = rho0
    viol_prev = np.inf
    outer_done = 0
    for outer in range(1, max_outer + 1):
        rho_k, mu_k = rho, mu.copy()

        def lagrangian(z, rho_k=rho_k, mu_k=mu_k):
            g = -np.asarray(inequalities(z))  # g <= 0 feasible
            pen = np.maximum(0.0, mu_k + rho_k * g)
            return objective(z) + float(pen @ pen - mu_k @ mu_k) / (2.0 * rho_k)

        res = minimize(lagrangian, x, method="BFGS",
                       jac=lambda z: central_difference_gradient(lagrangian, z, gradient_step),
                       options={"maxiter": inner_maxiter, "gtol": 1e-8})
        step_norm = float(np.linalg.norm(res.x - x))
        x = res.x
        h = np.asarray(inequalities(x))
        viol = max(0.0, float(-np.min(h)))
        mu = np.maximum(0.0, mu - rho * h)
        outer_done = outer
        if viol == 0.0 and step_norm < 1e-8:
            break
        if viol > 0.25 * viol_prev:
            rho = min(rho * 10.0, 1e8)
        viol_prev = viol
    return AugLagResult(x=x, objective=float(objective(x)),
                        max_violation=max(0.0, float(-np.min(np.asarray(inequalities(x))))),
                        outer_iterations=outer_done)


def damped_pseudoinverse_solve(J: np.ndarray, e: np.ndarray,
                               damping: float = 1e-6) -> tuple[np.ndarray, float]:
    """Solve min ||J x - e|| via damped normal equations.

    Returns (x, condition number of the damped system).
    """
    H = J.T @ J + damping * np.eye(J.shape[1])
    cond = float(np.linalg.cond(H))
    return np.linalg.solve(H, J.T @ e), cond
