import numpy as np
import pytest

from conftest import random_rotation, random_tangent, random_unit
from rotcubics.dynamics import NhpState, cubic_sphere_rhs, integrate, nhp_rhs, project_initial_data
from rotcubics.lie_core import EX, EY, EZ, exp_so3
from rotcubics.planner import (
    BvpProblem,
    SegmentError,
    plan_waypoints,
    shoot_group,
    shoot_sphere,
    tangent_basis,
)
from rotcubics.sphere import cubic_residual_sphere


def planted_sphere_problem(rng, z_norm=1.5, T=1.0, dt=None):
    """Forward-integrate random initial data and pose the endpoint as a BVP."""
    dt = dt or T / 200.0
    x0 = random_unit(rng)
    v0 = random_tangent(rng, x0, scale=rng.uniform(0.3, 1.2))
    h1, h2 = tangent_basis(x0)
    z = rng.uniform(-1.0, 1.0, size=4)
    z *= rng.uniform(0.0, z_norm) / max(np.linalg.norm(z), 1e-12)
    state = project_initial_data(x0, v0, z[0] * h1 + z[1] * h2, z[2] * h1 + z[3] * h2)
    traj = integrate(cubic_sphere_rhs, state, T, dt)
    end = traj.state(len(traj) - 1)
    problem = BvpProblem(
        "sphere", (x0, v0), (end.x, np.cross(end.J, end.x)), T,
        shooting_tolerance=1e-8, max_iterations=25, dt=dt,
    )
    return problem, z


class TestShootSphere:
    def test_quarter_great_circle(self):
        problem = BvpProblem(
            "sphere",
            (EZ, (np.pi / 2) * EX),
            (EX, -(np.pi / 2) * EZ),
            1.0,
        )
        sol = shoot_sphere(problem)
        assert sol.converged
        assert np.linalg.norm(sol.unknowns) < 1e-9
        ts = sol.trajectory.times
        oracle = np.outer(np.cos(np.pi * ts / 2), EZ) + np.outer(np.sin(np.pi * ts / 2), EX)
        assert np.max(np.linalg.norm(sol.trajectory.block("x") - oracle, axis=1)) < 1e-9

    def test_plant_and_recover(self, rng):
        for _ in range(3):
            problem, z = planted_sphere_problem(rng)
            sol = shoot_sphere(problem)
            assert sol.converged
            assert sol.terminal_error <= 1e-6
            assert sol.iterations <= 25
            assert np.linalg.norm(sol.unknowns - z) < 1e-5

    def test_zero_length_problem(self):
        problem = BvpProblem("sphere", (EZ, np.zeros(3)), (EZ, np.zeros(3)), 1.0)
        sol = shoot_sphere(problem)
        assert sol.converged
        x = sol.trajectory.block("x")
        assert np.max(np.linalg.norm(x - EZ, axis=1)) < 1e-12

    def test_liftable_cubic_round_trip(self):
        from rotcubics.lifting import liftable_cubic

        T, dt = 1.0, 2.5e-3
        traj = liftable_cubic(EZ, EY, 0.8, 0.4, 0.6, T, dt)
        x = traj.block("x")
        jbar = traj.block("J")
        v0 = np.cross(jbar[0], x[0])
        v1 = np.cross(jbar[-1], x[-1])
        problem = BvpProblem("sphere", (x[0], v0), (x[-1], v1), T, dt=dt)
        sol = shoot_sphere(problem)
        assert sol.converged
        assert sol.terminal_error <= 1e-8

    def test_converged_solution_passes_residual(self, rng):
        problem, _ = planted_sphere_problem(rng)
        sol = shoot_sphere(problem)
        _, res = cubic_residual_sphere(sol.trajectory)
        assert np.max(np.linalg.norm(res, axis=1)) < 1e-2

    def test_rotation_equivariance(self, rng):
        problem, _ = planted_sphere_problem(rng)
        sol = shoot_sphere(problem)
        r = random_rotation(rng)
        (p0, v0), (p1, v1) = problem.start, problem.end
        rotated = BvpProblem(
            "sphere", (r @ p0, r @ v0), (r @ p1, r @ v1), problem.duration,
            shooting_tolerance=problem.shooting_tolerance, dt=problem.dt,
        )
        sol_r = shoot_sphere(rotated)
        assert sol_r.converged
        gap = sol_r.trajectory.block("x") - sol.trajectory.block("x") @ r.T
        assert np.max(np.linalg.norm(gap, axis=1)) <= 1e-8

    def test_validation(self):
        with pytest.raises(ValueError):
            BvpProblem("sphere", (EZ, EX), (EX, EZ), -1.0)
        with pytest.raises(ValueError):
            BvpProblem("sphere", (EZ, EZ), (EX, -EZ), 1.0)  # non-tangent start
        with pytest.raises(ValueError):
            BvpProblem("torus", (EZ, EX), (EX, -EZ), 1.0)
        with pytest.raises(ValueError):
            BvpProblem("sphere", (EZ, EX), (-EZ, EX), 1.0)  # antipodal chart


class TestShootGroup:
    def test_geodesic_consistent_data(self):
        J = np.array([0.4, -0.2, 0.5])
        problem = BvpProblem("group", (np.eye(3), J), (exp_so3(J), J), 1.0)
        sol = shoot_group(problem)
        assert sol.converged
        assert np.linalg.norm(sol.unknowns) < 1e-7

    def test_plant_and_recover(self):
        s = NhpState([0.3, 0.5, -0.2], [0.4, 0.0, 0.3], [0.0, -0.2, 0.5])
        dt = 1.0 / 400.0
        traj = integrate(nhp_rhs, s, 1.0, dt)
        end = traj.state(len(traj) - 1)
        problem = BvpProblem("group", (np.eye(3), s.J), (end.g, end.J), 1.0, dt=dt)
        sol = shoot_group(problem)
        assert sol.converged
        assert np.linalg.norm(sol.unknowns - np.concatenate([s.J1, s.J2])) <= 1e-6

    def test_infeasible_tolerance_returns_best_iterate(self):
        s = NhpState([0.3, 0.5, -0.2], [0.4, 0.0, 0.3], [0.0, -0.2, 0.5])
        traj = integrate(nhp_rhs, s, 1.0, 0.05)
        end = traj.state(len(traj) - 1)
        problem = BvpProblem(
            "group", (np.eye(3), s.J), (end.g, end.J), 1.0,
            shooting_tolerance=1e-16, max_iterations=6, dt=0.05,
        )
        sol = shoot_group(problem)
        assert not sol.converged
        assert sol.trajectory is not None
        assert np.isfinite(sol.terminal_error)

    def test_nu_conserved_on_solution(self):
        from rotcubics.dynamics import lie_quadratic

        s = NhpState([0.3, 0.5, -0.2], [0.4, 0.0, 0.3], [0.0, -0.2, 0.5])
        dt = 1.0 / 400.0
        traj = integrate(nhp_rhs, s, 1.0, dt)
        end = traj.state(len(traj) - 1)
        sol = shoot_group(BvpProblem("group", (np.eye(3), s.J), (end.g, end.J), 1.0, dt=dt))
        nus = np.array([lie_quadratic(st) for st in sol.trajectory.states()])
        assert np.max(np.linalg.norm(nus - nus[0], axis=1)) < 1e-9


class TestPlanWaypoints:
    def test_great_circle_waypoints_are_geodesic(self):
        # three points on the equator-through-ez great circle with matched speeds
        xs = [EZ, (EZ + EX) / np.sqrt(2.0), EX]
        speed = np.pi / 4.0
        vs = [
            speed * EX,
            speed * (EX - EZ) / np.sqrt(2.0),
            -speed * EZ,
        ]
        path = plan_waypoints(list(zip(xs, vs)), [1.0, 1.0])
        assert all(s.converged for s in path.solutions)
        assert all(np.linalg.norm(s.unknowns) < 1e-6 for s in path.solutions)
        assert max(path.junction_position_errors) < 1e-9
        assert max(path.junction_velocity_errors) < 1e-7

    def test_two_waypoints_reduces_to_single_shoot(self):
        start = (EZ, (np.pi / 2) * EX)
        end = (EX, -(np.pi / 2) * EZ)
        path = plan_waypoints([start, end], [1.0])
        direct = shoot_sphere(BvpProblem("sphere", start, end, 1.0))
        assert len(path.segments) == 1
        assert np.allclose(path.solutions[0].unknowns, direct.unknowns, atol=1e-12)

    def test_single_waypoint_is_error(self):
        with pytest.raises(ValueError):
            plan_waypoints([(EZ, EX)], [])

    def test_non_convergent_segment_reports_index(self):
        # velocities inconsistent with a geodesic, so one iteration at an
        # unreachable tolerance cannot converge
        start = (EZ, 0.8 * EX)
        end = (EX, 0.5 * EY)
        with pytest.raises(SegmentError) as err:
            plan_waypoints([start, end], [1.0], shooting_tolerance=1e-15, max_iterations=1)
        assert err.value.segment == 0
