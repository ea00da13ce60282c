"""The round sphere S^2 = SO(3)/S^1 with anchor point e_z.

Points are unit 3-vectors, tangent vectors are ambient 3-vectors orthogonal
to their base point.  An algebra element Omega generates the tangent field
Omega x x, and the horizontal generator of a velocity v at x is x x v.
"""

from __future__ import annotations

import numpy as np

from . import _fd
from .lie_core import as_vector3, bracket

ANCHOR = np.array([0.0, 0.0, 1.0])

# tangency violations up to this size are re-projected silently; beyond it
# the input is treated as user error
TANGENCY_TOL = 1e-8


def require_sphere_point(x, tol: float = 1e-10) -> np.ndarray:
    x = as_vector3(x, "sphere point")
    n = np.linalg.norm(x)
    if abs(n - 1.0) > tol:
        raise ValueError(f"sphere point must be a unit vector (|x| - 1 = {n - 1.0:.3e})")
    return x / n


def tangent_part(x, v) -> np.ndarray:
    """Project an ambient vector onto the tangent plane at x."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - (v @ x) * x


def require_tangent(x, v, tol: float = TANGENCY_TOL, name: str = "vector") -> np.ndarray:
    """Validate tangency of v at x; small violations are re-projected."""
    v = as_vector3(v, name)
    if abs(float(v @ x)) > tol:
        raise ValueError(f"{name} is not tangent at the base point (x.v = {float(v @ x):.3e})")
    return tangent_part(x, v)


def project(g) -> np.ndarray:
    """Bundle projection SO(3) -> S^2, g -> g e_z."""
    return np.asarray(g, dtype=float) @ ANCHOR


def generator(xi, x) -> np.ndarray:
    """Infinitesimal generator of xi at x: xi x x."""
    return np.cross(as_vector3(xi), np.asarray(x, dtype=float))


def split(xi, x) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal/vertical decomposition of xi at x.

    The vertical subspace at x is spanned by x itself; returns
    (horizontal, vertical) with horizontal . x = 0 and sum reconstructing xi.
    """
    xi = as_vector3(xi)
    x = np.asarray(x, dtype=float)
    vertical = (xi @ x) * x
    return xi - vertical, vertical


def horizontal_generator(x, v) -> np.ndarray:
    """The unique horizontal algebra element generating v at x: x x v."""
    x = require_sphere_point(x)
    v = require_tangent(x, v)
    return np.cross(x, v)


def covariant_derivative(x, v, dv_ambient) -> np.ndarray:
    """Levi-Civita covariant derivative along a curve through (x, v).

    `dv_ambient` is the ambient time derivative of the tangent field at x;
    the result is its tangential projection.
    """
    x = require_sphere_point(x)
    require_tangent(x, v)
    return tangent_part(x, as_vector3(dv_ambient, "ambient derivative"))


def curvature_sphere(xi, eta, x) -> np.ndarray:
    """Curvature value R(eta_Q, xi_Q) xi_Q = -([xi, [xi, eta]]) x x at x.

    Both xi and eta must be horizontal at x.
    """
    x = require_sphere_point(x)
    xi = as_vector3(xi)
    eta = as_vector3(eta)
    for name, w in (("xi", xi), ("eta", eta)):
        if abs(float(w @ x)) > TANGENCY_TOL:
            raise ValueError(f"curvature_sphere: {name} is not horizontal at x")
    return np.cross(-bracket(xi, bracket(xi, eta)), x)


def _x_series(traj, dt):
    """Accept a Trajectory with x columns or a raw (n, 3) array plus dt."""
    if hasattr(traj, "block"):
        return traj.block("x"), traj.dt, np.asarray(traj.times)
    x = np.asarray(traj, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3:
        raise ValueError("expected an (n, 3) array of sphere points")
    if dt is None or dt <= 0.0:
        raise ValueError("dt must be given (positive) for a raw sample array")
    return x, float(dt), dt * np.arange(x.shape[0])


def generator_series(traj, dt=None) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal generator J = x x xdot of a sampled sphere curve.

    Returns (times, J) on the finite-difference interior grid.
    """
    x, dt, times = _x_series(traj, dt)
    m = _fd.MARGIN[1]
    xd = _fd.diff(x, dt, 1)
    return times[m:-m], np.cross(x[m:-m], xd)


def cubic_residual_sphere(traj, dt=None) -> tuple[np.ndarray, np.ndarray]:
    """Residual x x (J''' + 2 J'' x J) of the sphere cubic equation.

    Derivatives of J = x x xdot are expanded by the product rule onto direct
    4th-order stencils of x, so the residual is available at interior samples
    [3, n-4) and decays at 4th order on true cubics.  Returns
    (interior times, (k, 3) residual array).
    """
    x, dt, times = _x_series(traj, dt)
    n = x.shape[0]
    if n < 7:
        raise ValueError(f"cubic residual needs at least 7 samples, got {n}")
    m = 3
    x1 = _fd.interior(_fd.diff(x, dt, 1), m - _fd.MARGIN[1])
    x3 = _fd.diff(x, dt, 3)
    x4 = _fd.diff(x, dt, 4)
    xi = _fd.interior(x, m)
    jbar = np.cross(xi, x1)
    # J'' = xdot x xddot + x x xdddot ; J''' = 2 xdot x xdddot + x x xddddot
    x2 = _fd.interior(_fd.diff(x, dt, 2), m - _fd.MARGIN[2])
    j2 = np.cross(x1, x2) + np.cross(xi, x3)
    j3 = 2.0 * np.cross(x1, x3) + np.cross(xi, x4)
    residual = np.cross(xi, j3 + 2.0 * np.cross(j2, jbar))
    return times[m:-m], residual
