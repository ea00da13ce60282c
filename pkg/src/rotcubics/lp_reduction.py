"""Second-order Lagrange-Poincare checks for SO(3) over S^2.

A group trajectory reduces to (x, sigma) with x = g e_z and sigma the
vertical velocity scalar xi . x.  The reduced cubic system on the sphere
couples the base curve to sigma; its scalar member
    -x . (xdot x xddot) + sigma |xdot|^2 - sigma'' = alpha
must be constant along group cubics, and the displayed vector member is
checked as a residual with alpha estimated by the series mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fd
from .dynamics import Trajectory
from .lie_core import EZ, as_vector3
from .sphere import require_sphere_point, tangent_part


@dataclass(frozen=True)
class ReducedSample:
    """One reduced sample (t; x, xdot, xddot; sigma, sigma', sigma'')."""

    t: float
    x: np.ndarray
    xdot: np.ndarray
    xddot: np.ndarray
    sigma: float
    sigma_dot: float
    sigma_ddot: float

    def __post_init__(self):
        x = require_sphere_point(self.x)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xdot", as_vector3(self.xdot, "xdot"))
        object.__setattr__(self, "xddot", as_vector3(self.xddot, "xddot"))
        if abs(float(self.xdot @ x)) > 1e-8:
            raise ValueError("reduced sample: xdot is not tangent at x")


@dataclass(frozen=True)
class Lp2Result:
    """Interior-grid output of the second-order reduced-system check."""

    times: np.ndarray
    vector_residuals: np.ndarray
    alpha_series: np.ndarray
    alpha_mean: float
    alpha_std: float


def sigma_from_group(g, xi) -> float:
    """Vertical velocity scalar of a group point: (Ad_{g^-1} xi) . e_z = xi . (g e_z)."""
    return float(as_vector3(xi, "xi") @ (np.asarray(g, dtype=float) @ EZ))


def reduced_lagrangian_s2(s: ReducedSample) -> float:
    """Deviation-from-geodesic cost 1/2 |D_t xdot - sigma x x xdot|^2 + 1/2 sigma'^2."""
    accel = tangent_part(s.x, s.xddot)
    coupling = s.sigma * np.cross(s.x, s.xdot)
    return float(0.5 * np.linalg.norm(accel - coupling) ** 2 + 0.5 * s.sigma_dot**2)


def reduced_samples(traj: Trajectory) -> list[ReducedSample]:
    """Extract (x, sigma) jets from a group trajectory (nhp or ep2 flavor).

    Base points come from the bundle projection of the rotation block, the
    generator from the trajectory's algebra velocity; derivatives use the
    shared 4th-order stencils, so samples live on the interior grid.
    """
    g = traj.rotations()
    if traj.flavor == "nhp":
        xi = traj.block("J")
    elif traj.flavor == "ep2":
        xi = traj.block("xi")
    else:
        raise ValueError("reduced_samples expects an nhp or ep2 trajectory")
    x = g @ EZ
    sigma = np.einsum("ij,ij->i", xi, x)
    dt = traj.dt
    m = _fd.MARGIN[2]
    xd = _fd.diff(x, dt, 1)
    xdd = _fd.diff(x, dt, 2)
    sd = _fd.diff(sigma, dt, 1)
    sdd = _fd.diff(sigma, dt, 2)
    times = np.asarray(traj.times)[m:-m]
    xs = x[m:-m]
    ss = sigma[m:-m]
    return [
        ReducedSample(times[i], xs[i], xd[i], xdd[i], ss[i], sd[i], sdd[i])
        for i in range(len(times))
    ]


def _series(samples) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = np.array([s.t for s in samples])
    x = np.array([s.x for s in samples])
    sigma = np.array([s.sigma for s in samples])
    if len(samples) >= 2:
        steps = np.diff(t)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("lp2_residuals requires a uniform time grid")
    return t, x, sigma


def lp2_residuals(samples: list[ReducedSample]) -> Lp2Result:
    """Residuals of the reduced second-order system on S^2.

    Returns the alpha series -x.(xdot x xddot) + sigma |xdot|^2 - sigma''
    per interior sample and the vector residual of the displayed equation
    with alpha taken as the series mean.  All derivatives are recomputed
    from the (x, sigma) series with the shared stencils, which costs a
    3-sample margin on each side.
    """
    if len(samples) < 7:
        raise ValueError("lp2_residuals needs at least 7 uniform samples")
    t, x, sigma = _series(samples)
    dt = float(t[1] - t[0])
    m = 3
    trim = lambda arr, mm: arr[m - mm : arr.shape[0] - (m - mm)] if m > mm else arr

    x1 = trim(_fd.diff(x, dt, 1), _fd.MARGIN[1])
    x2 = trim(_fd.diff(x, dt, 2), _fd.MARGIN[2])
    x3 = _fd.diff(x, dt, 3)
    x4 = _fd.diff(x, dt, 4)
    s0 = _fd.interior(sigma, m)
    s1 = trim(_fd.diff(sigma, dt, 1), _fd.MARGIN[1])
    s2 = trim(_fd.diff(sigma, dt, 2), _fd.MARGIN[2])
    xs = _fd.interior(x, m)
    times = _fd.interior(t, m)

    def dot(a, b):
        return np.einsum("ij,ij->i", a, b)

    def perp(w):
        return w - dot(w, xs)[:, None] * xs

    # covariant derivative chain of the velocity, expanded in ambient terms
    a1 = x2 - dot(x2, xs)[:, None] * xs
    f = dot(x3, xs) + dot(x2, x1)
    g = dot(x2, xs)
    a1dot = x3 - f[:, None] * xs - g[:, None] * x1
    a2 = a1dot - dot(a1dot, xs)[:, None] * xs
    fdot = dot(x4, xs) + 2.0 * dot(x3, x1) + dot(x2, x2)
    a1ddot = x4 - fdot[:, None] * xs - 2.0 * f[:, None] * x1 - g[:, None] * x2
    a2dot = a1ddot - (dot(a1ddot, xs) + dot(a1dot, x1))[:, None] * xs - dot(a1dot, xs)[:, None] * x1
    a3 = a2dot - dot(a2dot, xs)[:, None] * xs

    speed2 = dot(x1, x1)
    lhs = a3 + speed2[:, None] * a1 - dot(a1, x1)[:, None] * x1

    alpha_series = -dot(xs, np.cross(x1, x2)) + s0 * speed2 - s2
    alpha = float(np.mean(alpha_series))

    xxd = np.cross(xs, x1)
    rhs = (
        (s0**2)[:, None] * perp(x2)
        + (2.0 * s0 * s1)[:, None] * x1
        + s2[:, None] * xxd
        + 3.0 * s1[:, None] * np.cross(xs, x2)
        + s0[:, None] * (2.0 * (np.cross(xs, x3) + perp(np.cross(x1, x2))) + speed2[:, None] * xxd)
        - alpha * xxd
    )
    residual = lhs - rhs
    return Lp2Result(times, residual, alpha_series, alpha, float(np.std(alpha_series)))
