"""Horizontal lifts of sphere curves and the lift-to-cubic analysis.

A sphere cubic lifts horizontally to a group cubic exactly when its
generator curve is a quadratic polynomial with mutually commuting,
horizontal coefficients; on S^2 that forces a single rotation axis, i.e.
geodesics run with a cubic time law.  The certificate below fits the
quadratic and reports commutators, horizontality defects and fit residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import SphereCubicState, Trajectory, step_count
from .lie_core import as_vector3, bracket, exp_so3, require_rotation
from .sphere import generator_series, project, require_sphere_point

# verdict tolerances: one order above numerical noise at the default step
# size; the fit residual is dominated by integration error
TOL_COMMUTATOR = 1e-8
TOL_HORIZONTAL = 1e-8
TOL_FIT = 1e-6


@dataclass(frozen=True)
class LiftabilityCertificate:
    """Quadratic-generator fit J(t) ~ u t^2/2 + v t + w and its defect report."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    commutator_norms: tuple[float, float, float]
    horizontality_defects: tuple[float, float, float]
    fit_residual: float
    verdict: bool
    tol_commutator: float = TOL_COMMUTATOR
    tol_horizontal: float = TOL_HORIZONTAL
    tol_fit: float = TOL_FIT

    def as_dict(self) -> dict:
        return {
            "u": list(self.u),
            "v": list(self.v),
            "w": list(self.w),
            "commutator_norms": list(self.commutator_norms),
            "horizontality_defects": list(self.horizontality_defects),
            "fit_residual": self.fit_residual,
            "verdict": self.verdict,
            "tolerances": {
                "commutator": self.tol_commutator,
                "horizontal": self.tol_horizontal,
                "fit": self.tol_fit,
            },
        }


def _jbar_series(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Generator samples of a trajectory: state J columns, else x x xdot."""
    try:
        return np.asarray(traj.times), traj.block("J").copy()
    except KeyError:
        times, jbar = generator_series(traj)
        return times, jbar


def horizontal_lift(traj: Trajectory, g0) -> Trajectory:
    """Integrate gdot = hat(J(t)) g along a sphere trajectory's generator.

    `traj` must carry x and J blocks (sphere_cubic, ballistic or
    sphere_path flavor).  g0 has to project to the initial point; midpoint
    stage values of J are interpolated from neighboring samples at the
    scheme's order.
    """
    g0 = require_rotation(g0, 1e-8, "g0")
    x = traj.block("x")
    jbar = traj.block("J")
    if np.linalg.norm(project(g0) - x[0]) > 1e-8:
        raise ValueError("horizontal_lift: g0 does not project to the curve's initial point")
    done, rows = _kernels.run_lift(jbar, np.asarray(g0, dtype=float).reshape(9), traj.dt)
    if done < jbar.shape[0] - 1:
        raise RuntimeError("horizontal_lift: non-finite state during integration")
    return Trajectory("group", traj.t0, traj.dt, rows)


def lift_obstruction(s: SphereCubicState) -> float:
    """Vertical magnitude |[J, J'] . x|; zero iff the cubic lifts to a cubic."""
    return float(abs(bracket(s.J, s.J1) @ s.x))


def liftability_certificate(
    traj: Trajectory,
    tol_commutator: float = TOL_COMMUTATOR,
    tol_horizontal: float = TOL_HORIZONTAL,
    tol_fit: float = TOL_FIT,
) -> LiftabilityCertificate:
    """Least-squares quadratic fit of the generator curve and defect report.

    The verdict is true iff all three pairwise commutator norms and all
    three horizontality defects against the initial point stay below their
    tolerances and the fit residual is small.
    """
    if len(traj) < 5:
        raise ValueError("liftability_certificate needs at least 5 samples")
    x0 = traj.block("x")[0]
    times, jbar = _jbar_series(traj)
    t = times - times[0]
    basis = np.column_stack([0.5 * t**2, t, np.ones_like(t)])
    coeffs, *_ = np.linalg.lstsq(basis, jbar, rcond=None)
    u, v, w = coeffs[0], coeffs[1], coeffs[2]
    fit_residual = float(np.max(np.linalg.norm(jbar - basis @ coeffs, axis=1)))
    commutators = (
        float(np.linalg.norm(bracket(u, v))),
        float(np.linalg.norm(bracket(u, w))),
        float(np.linalg.norm(bracket(v, w))),
    )
    defects = (
        float(abs(u @ x0)),
        float(abs(v @ x0)),
        float(abs(w @ x0)),
    )
    verdict = (
        max(commutators) <= tol_commutator
        and max(defects) <= tol_horizontal
        and fit_residual <= tol_fit
    )
    return LiftabilityCertificate(
        u, v, w, commutators, defects, fit_residual, verdict,
        tol_commutator, tol_horizontal, tol_fit,
    )


def liftable_cubic(q0, d, a: float, b: float, c: float, t_final: float, dt: float) -> Trajectory:
    """Closed-form liftable cubic exp((a t^3/6 + b t^2/2 + c t) hat(d)) q0.

    d must be a nonzero horizontal direction at q0.  The generator
    (a t^2/2 + b t + c) d is recorded alongside the points (sphere_path
    flavor), so the trajectory can be lifted without finite differencing.
    """
    q0 = require_sphere_point(q0)
    d = as_vector3(d, "d")
    if np.linalg.norm(d) == 0.0:
        raise ValueError("liftable_cubic: d must be nonzero")
    if abs(float(d @ q0)) > 1e-8:
        raise ValueError("liftable_cubic: d must be horizontal at q0 (d . q0 = 0)")
    n = step_count(t_final, dt)
    if n < 1:
        raise ValueError("liftable_cubic: grid must contain at least 2 samples")
    rows = np.zeros((n + 1, 6))
    for k in range(n + 1):
        t = k * dt
        theta = a * t**3 / 6.0 + b * t**2 / 2.0 + c * t
        rows[k, 0:3] = exp_so3(theta * d) @ q0
        rows[k, 3:6] = (a * t**2 / 2.0 + b * t + c) * d
    return Trajectory("sphere_path", 0.0, dt, rows)
