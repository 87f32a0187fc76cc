"""Euclidean and A-norm projections onto the supported convex sets.

The Euclidean routines are the sort-and-threshold algorithms for the simplex
and the l1-ball (O(d log d) because of the sort). The A-norm projection is
solved with accelerated projected gradient on q(x) = 1/2 (x-y)^T A (x-y),
using one Euclidean projection per iteration.
"""
from typing import TYPE_CHECKING

import numpy as np

from sococast.utils.exceptions import ContractError, NumericError
from sococast.utils.typechecking import check_dim, check_positive

if TYPE_CHECKING:
    from sococast.geometry.sets import FeasibleSet


def project_simplex(v: np.ndarray, s: float = 1.0) -> np.ndarray:
    """Euclidean projection of `v` onto {w >= 0, sum(w) = s}.

    Ties in the descending sort are broken by index order.
    """
    check_positive(s, "s")
    v = np.asarray(v, dtype=float)
    order = np.argsort(-v, kind="stable")
    u = v[order]
    cssv = np.cumsum(u) - s
    ind = np.arange(1, v.shape[0] + 1)
    rho = np.nonzero(u - cssv / ind > 0)[0][-1]
    theta = cssv[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    # cancellation in v - theta can leave the mass off by a few ulps
    return w * (s / w.sum())


def project_l1_ball(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection of `v` onto {w : ||w||_1 <= radius}."""
    v = np.asarray(v, dtype=float)
    u = np.abs(v)
    if u.sum() <= radius:
        return v.copy()
    return np.sign(v) * project_simplex(u, s=radius)


def project_positive_l1(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of `v` onto {w >= 0, ||w||_1 <= radius}.

    Negative coordinates are clamped first; if the clamped point still has too
    much mass the answer lies on the face sum(w) = radius.
    """
    v = np.asarray(v, dtype=float)
    w = np.maximum(v, 0.0)
    if w.sum() <= radius:
        return w
    return project_simplex(v, s=radius)


def project_box(v: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(v, dtype=float), lower, upper)


def power_iteration(A: np.ndarray, n_iter: int = 50) -> float:
    """Estimate the largest eigenvalue of the symmetric PSD matrix `A`."""
    d = A.shape[0]
    v = np.ones(d) / np.sqrt(d)
    rayleigh = 0.0
    for _ in range(n_iter):
        w = A @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        rayleigh = float(v @ A @ v)
    # the top eigenvalue also dominates every diagonal entry
    return max(rayleigh, float(np.max(np.diag(A))))


def a_norm_objective(x: np.ndarray, y: np.ndarray, A: np.ndarray) -> float:
    diff = x - y
    return 0.5 * float(diff @ A @ diff)


def a_norm_project(
    feasible_set: "FeasibleSet",
    y: np.ndarray,
    A: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    power_iters: int = 50,
) -> np.ndarray:
    """Generalized projection argmin_{x in K} (x-y)^T A (x-y).

    Parameters
    ----------
    - `feasible_set` (`FeasibleSet`): The convex set K.
    - `y` (np.ndarray): The point to project.
    - `A` (np.ndarray): A symmetric positive definite matrix.
    - `tol` (float, optional): Stop when successive iterates differ by at most `tol` in sup-norm. Defaults to 1e-10.
    - `max_iter` (int, optional): Iteration cap. Defaults to 10,000.
    - `power_iters` (int, optional): Power iterations used to estimate the step 1/lambda_max(A). Defaults to 50.

    Returns
    -------
    - `x` (np.ndarray): The projection. It is always the output of a Euclidean projection, hence feasible.

    Raises
    ------
    - `ContractError`: If dimensions disagree.
    - `NumericError`: If the iteration cap is reached.
    """
    y = np.asarray(y, dtype=float)
    check_dim(y, feasible_set.dim, "y")
    if A.shape != (feasible_set.dim, feasible_set.dim):
        raise ContractError(
            f"Var: A should have shape {(feasible_set.dim, feasible_set.dim)}, got: {A.shape}"
        )
    if feasible_set.contains(y):
        return y.copy()

    step = 1.0 / (1.01 * power_iteration(A, power_iters))
    x = feasible_set.project(y)
    z = x.copy()
    momentum = 1.0
    diff = np.inf
    for _ in range(max_iter):
        x_new = feasible_set.project(z - step * (A @ (z - y)))
        diff = float(np.max(np.abs(x_new - x)))
        if diff <= tol:
            return x_new
        momentum_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum**2))
        if float((z - x_new) @ (x_new - x)) > 0.0:
            # gradient-based restart keeps the scheme monotone
            momentum_new = 1.0
            z = x_new.copy()
        else:
            z = x_new + ((momentum - 1.0) / momentum_new) * (x_new - x)
        x, momentum = x_new, momentum_new
    raise NumericError(
        f"A-norm projection did not converge after {max_iter} iterations",
        last_iterate=x,
        residual=diff,
    )
