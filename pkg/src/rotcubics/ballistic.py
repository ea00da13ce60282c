"""Ballistic curves: projections of non-horizontal group geodesics to S^2.

The reduced state (x, J, sigma_bar) evolves by the first-order bracket
system in `dynamics.lp1_rhs`; this module provides the cubic condition
(norm of the triple-bracket sum), the 4-way classification of the sphere
case, and the explicit circle geometry of the equal-norm solutions.
"""

from __future__ import annotations

import numpy as np

from .dynamics import BallisticState
from .lie_core import as_vector3, bracket
from .sphere import require_sphere_point, require_tangent

TRIVIAL = "trivial"
HORIZONTAL_GEODESIC = "horizontal-geodesic"
EQUAL_NORM_CIRCLE = "equal-norm-circle"
NON_CUBIC = "non-cubic"

# classification thresholds; absolute, matched to O(1) data (document and
# rescale these when classifying states far from unit magnitude)
ZERO_TOL = 1e-12
EQUAL_NORM_TOL = 1e-10


def ballistic_cubic_condition(s: BallisticState) -> float:
    """Norm of [s,[s,[s,J]]] + [J,[J,[J,s]]] with s = sigma_bar.

    Zero exactly when the projected geodesic is a Riemannian cubic.
    """
    j, sg = s.J, s.sigma_bar
    total = bracket(sg, bracket(sg, bracket(sg, j))) + bracket(j, bracket(j, bracket(j, sg)))
    return float(np.linalg.norm(total))


def classify_s2(s: BallisticState) -> str:
    """Classify the projected curve of a sphere ballistic state.

    On S^2 the cubic condition collapses to (|sigma|^2 - |J|^2) J x sigma = 0,
    so the cubics among ballistic curves are: constant curves, projections of
    horizontal geodesics (great circles), and the equal-norm small circles.
    """
    j_norm = float(np.linalg.norm(s.J))
    s_norm = float(np.linalg.norm(s.sigma_bar))
    if j_norm <= ZERO_TOL:
        return TRIVIAL
    if s_norm <= ZERO_TOL:
        return HORIZONTAL_GEODESIC
    if abs(s_norm**2 - j_norm**2) <= EQUAL_NORM_TOL:
        return EQUAL_NORM_CIRCLE
    return NON_CUBIC


def circle_parameters(x0, v0, sign: int = 1) -> tuple[np.ndarray, float]:
    """Axis and radius of the equal-norm ballistic circle through (x0, v0).

    The rotation axis is x0 x v0 +/- |v0| x0 normalized; the circle radius is
    1/sqrt(2) independently of the speed.
    """
    x0 = require_sphere_point(x0)
    v0 = require_tangent(x0, v0, name="v0")
    speed = float(np.linalg.norm(v0))
    if speed == 0.0:
        raise ValueError("circle_parameters: v0 must be nonzero")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    omega = np.cross(x0, v0) + sign * speed * x0
    axis = omega / np.linalg.norm(omega)
    radius = float(np.linalg.norm(x0 - (x0 @ axis) * axis))
    return axis, radius


def equal_norm_state(x0, v0, sign: int = 1) -> BallisticState:
    """Ballistic state with |sigma_bar| = |J|, whose projection is a circle."""
    x0 = require_sphere_point(x0)
    v0 = require_tangent(x0, v0, name="v0")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return BallisticState(x0, np.cross(x0, v0), sign * float(np.linalg.norm(v0)) * x0)


def radius_about_axis(x, axis) -> np.ndarray:
    """Distance of sphere samples from the line through the origin along axis."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    axis = as_vector3(axis, "axis")
    n = np.linalg.norm(axis)
    if n <= 1e-15:
        return np.full(x.shape[0], np.nan)
    a = axis / n
    return np.linalg.norm(x - np.outer(x @ a, a), axis=1)
