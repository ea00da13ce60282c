"""Two-point boundary-value planning by single shooting.

Unknown initial derivatives of the cubic flows are found by Newton
iteration with a forward-difference Jacobian and damped step halving.
Endpoint residuals live in linear charts: the tangent log map at the
target on the sphere, the matrix log on the rotation group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    NhpState,
    Trajectory,
    cubic_sphere_rhs,
    integrate,
    nhp_rhs,
    project_initial_data,
)
from .lie_core import ChartError, as_vector3, exp_so3, log_so3, require_rotation
from .sphere import require_sphere_point, require_tangent

SPHERE = "sphere"
GROUP = "group"

# forward-difference perturbation for the shooting Jacobian
FD_EPS = 1e-6
MAX_HALVINGS = 8


class SegmentError(RuntimeError):
    """A waypoint segment failed to converge; carries the segment index."""

    def __init__(self, segment: int, solution: "BvpSolution"):
        super().__init__(f"waypoint segment {segment} did not converge")
        self.segment = segment
        self.solution = solution


@dataclass(frozen=True)
class BvpProblem:
    """Endpoint positions and velocities to be joined by a cubic in time T.

    On the sphere, points are unit vectors and velocities tangent vectors;
    on the group, points are rotations and velocities right-trivialized
    algebra vectors.
    """

    space: str
    start: tuple
    end: tuple
    duration: float
    shooting_tolerance: float = 1e-8
    max_iterations: int = 25
    dt: float | None = None

    def __post_init__(self):
        if self.space not in (SPHERE, GROUP):
            raise ValueError(f"space must be {SPHERE!r} or {GROUP!r}")
        if not self.duration > 0.0:
            raise ValueError("duration must be positive")
        if self.dt is None:
            object.__setattr__(self, "dt", self.duration / 400.0)
        if not 0.0 < self.dt <= self.duration:
            raise ValueError("dt must lie in (0, duration]")
        p0, v0 = self.start
        p1, v1 = self.end
        if self.space == SPHERE:
            p0 = require_sphere_point(p0)
            p1 = require_sphere_point(p1)
            v0 = require_tangent(p0, v0, name="start velocity")
            v1 = require_tangent(p1, v1, name="end velocity")
            if float(p0 @ p1) < -1.0 + 1e-9:
                raise ValueError("antipodal endpoints: the target chart is singular")
        else:
            p0 = require_rotation(p0, 1e-8, "start rotation")
            p1 = require_rotation(p1, 1e-8, "end rotation")
            v0 = as_vector3(v0, "start velocity")
            v1 = as_vector3(v1, "end velocity")
        object.__setattr__(self, "start", (p0, v0))
        object.__setattr__(self, "end", (p1, v1))


@dataclass(frozen=True)
class BvpSolution:
    trajectory: Trajectory | None
    unknowns: np.ndarray
    terminal_error: float
    iterations: int
    converged: bool


def tangent_basis(x) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal basis of the tangent plane at x."""
    x = np.asarray(x, dtype=float)
    ref = np.array([0.0, 0.0, 1.0]) if abs(x[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(x, ref)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(x, e1)


def sphere_log(target, p) -> np.ndarray:
    """Log map of p in the tangent plane at target; fails near the antipode."""
    c = float(np.clip(p @ target, -1.0, 1.0))
    if c < -1.0 + 1e-9:
        raise ChartError("sphere_log: point is antipodal to the chart center")
    u = p - c * target
    nu = np.linalg.norm(u)
    if nu < 1e-15:
        return np.zeros(3)
    return float(np.arccos(c)) * u / nu


def _newton(residual_fn, z0, tol, max_iter):
    """Damped Newton with forward-difference Jacobian; returns the best iterate."""
    z = np.asarray(z0, dtype=float).copy()
    r = residual_fn(z)
    best_z, best_r = z.copy(), float(np.linalg.norm(r))
    iterations = 0
    for _ in range(max_iter):
        if best_r <= tol:
            return best_z, best_r, iterations, True
        iterations += 1
        jac = np.zeros((r.size, z.size))
        for j in range(z.size):
            zp = z.copy()
            zp[j] += FD_EPS
            jac[:, j] = (residual_fn(zp) - r) / FD_EPS
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        improved = False
        for halving in range(MAX_HALVINGS + 1):
            z_try = z + step / (2.0**halving)
            try:
                r_try = residual_fn(z_try)
            except ChartError:
                continue
            if np.linalg.norm(r_try) < np.linalg.norm(r):
                z, r = z_try, r_try
                improved = True
                break
        if not improved:
            break
        if float(np.linalg.norm(r)) < best_r:
            best_z, best_r = z.copy(), float(np.linalg.norm(r))
    return best_z, best_r, iterations, best_r <= tol


def shoot_sphere(problem: BvpProblem) -> BvpSolution:
    """Solve the sphere cubic BVP for the free horizontal parts of (J'(0), J''(0)).

    The residual stacks the endpoint position error in the target tangent
    chart and the endpoint velocity error in the same chart basis.
    """
    if problem.space != SPHERE:
        raise ValueError("shoot_sphere expects a sphere problem")
    x0, v0 = problem.start
    x1, v1 = problem.end
    h1, h2 = tangent_basis(x0)
    f1, f2 = tangent_basis(x1)
    t_final, dt = problem.duration, problem.dt

    def state_for(z):
        w2 = z[0] * h1 + z[1] * h2
        w3 = z[2] * h1 + z[3] * h2
        return project_initial_data(x0, v0, w2, w3)

    def residual(z):
        traj = integrate(cubic_sphere_rhs, state_for(z), t_final, dt)
        end = traj.state(len(traj) - 1)
        xe = end.x
        ve = np.cross(end.J, end.x)
        pos = sphere_log(x1, xe)
        vel = ve - v1
        return np.array([pos @ f1, pos @ f2, vel @ f1, vel @ f2])

    z, err, iters, ok = _newton(
        residual, np.zeros(4), problem.shooting_tolerance, problem.max_iterations
    )
    traj = integrate(cubic_sphere_rhs, state_for(z), t_final, dt)
    return BvpSolution(traj, z, err, iters, ok)


def shoot_group(problem: BvpProblem) -> BvpSolution:
    """Solve the group cubic BVP for (J'(0), J''(0)) of the NHP flow."""
    if problem.space != GROUP:
        raise ValueError("shoot_group expects a group problem")
    g0, xi0 = problem.start
    g1, xi1 = problem.end
    t_final, dt = problem.duration, problem.dt

    def state_for(z):
        return NhpState(xi0, z[0:3], z[3:6], g0)

    def residual(z):
        traj = integrate(nhp_rhs, state_for(z), t_final, dt)
        end = traj.state(len(traj) - 1)
        pos = log_so3(g1.T @ end.g)
        vel = end.J - xi1
        return np.concatenate([pos, vel])

    z, err, iters, ok = _newton(
        residual, np.zeros(6), problem.shooting_tolerance, problem.max_iterations
    )
    traj = integrate(nhp_rhs, state_for(z), t_final, dt)
    return BvpSolution(traj, z, err, iters, ok)


def solve(problem: BvpProblem) -> BvpSolution:
    return shoot_sphere(problem) if problem.space == SPHERE else shoot_group(problem)


@dataclass(frozen=True)
class PiecewisePath:
    """Consecutive BVP solutions through waypoints, with junction gaps."""

    segments: tuple[Trajectory, ...]
    solutions: tuple[BvpSolution, ...]
    junction_position_errors: tuple[float, ...]
    junction_velocity_errors: tuple[float, ...]

    @property
    def total_duration(self) -> float:
        return sum(s.dt * (len(s) - 1) for s in self.segments)


def plan_waypoints(
    points,
    durations,
    shooting_tolerance: float = 1e-8,
    max_iterations: int = 25,
    dt: float | None = None,
) -> PiecewisePath:
    """C^1 piecewise-cubic interpolation of sphere waypoints.

    `points` is a list of (position, velocity) pairs -- velocities are
    required at every waypoint; `durations` gives one time span per
    consecutive pair.  Raises SegmentError naming the first segment whose
    BVP does not converge.
    """
    if len(points) < 2:
        raise ValueError("plan_waypoints needs at least 2 waypoints")
    checked = []
    for p, v in points:
        p = require_sphere_point(p)
        checked.append((p, require_tangent(p, v, name="waypoint velocity")))
    points = checked
    durations = [float(T) for T in np.atleast_1d(durations)]
    if len(durations) != len(points) - 1:
        raise ValueError("need exactly one duration per waypoint segment")
    solutions = []
    for i in range(len(points) - 1):
        problem = BvpProblem(
            SPHERE,
            points[i],
            points[i + 1],
            durations[i],
            shooting_tolerance=shooting_tolerance,
            max_iterations=max_iterations,
            dt=dt,
        )
        sol = shoot_sphere(problem)
        if not sol.converged:
            raise SegmentError(i, sol)
        solutions.append(sol)
    pos_gaps = []
    vel_gaps = []
    for i in range(len(solutions) - 1):
        end = solutions[i].trajectory.state(len(solutions[i].trajectory) - 1)
        start = solutions[i + 1].trajectory.state(0)
        pos_gaps.append(float(np.linalg.norm(end.x - start.x)))
        vel_gaps.append(
            float(np.linalg.norm(np.cross(end.J, end.x) - np.cross(start.J, start.x)))
        )
    return PiecewisePath(
        tuple(s.trajectory for s in solutions),
        tuple(solutions),
        tuple(pos_gaps),
        tuple(vel_gaps),
    )
