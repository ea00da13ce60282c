"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report lines.
"""

import json

import numpy as np
import pytest

import rotcubics as rc
from conftest import random_tangent, random_unit
from rotcubics.ballistic import radius_about_axis
from rotcubics.cli import main as cli_main
from rotcubics.dynamics import (
    NhpState,
    SphereCubicState,
    cubic_sphere_rhs,
    integrate,
    lie_quadratic,
    lp1_rhs,
    nhp_rhs,
)
from rotcubics.lie_core import EX, EY, EZ, Metric
from rotcubics.lifting import horizontal_lift, liftability_certificate, liftable_cubic, lift_obstruction
from rotcubics.lp_reduction import lp2_residuals, reduced_samples
from rotcubics.planner import BvpProblem, shoot_sphere, tangent_basis
from rotcubics.sphere import cubic_residual_sphere, curvature_sphere, generator


def report(n, text):
    print(f"criterion {n}: PASS ({text})")


def test_criterion_1_lie_quadratic_conservation():
    s = NhpState([0.3, -0.2, 0.9], [1.0, 0.0, 0.2], [0.0, 0.5, 0.0])
    traj = integrate(nhp_rhs, s, 1.0, 1e-3)
    nus = np.array([lie_quadratic(st) for st in traj.states()])
    drift = float(np.max(np.linalg.norm(nus - nus[0], axis=1)))
    assert drift <= 1e-10
    report(1, f"max |nu(t) - nu(0)| = {drift:.3e} <= 1e-10")


def test_criterion_2_bi_invariant_reduction():
    J, J1, J2 = [0.3, -0.2, 0.9], [1.0, 0.0, 0.2], [0.0, 0.5, 0.0]
    metric = Metric.identity()
    ep = integrate(rc.Ep2Flow(metric), rc.ep2_state_from_derivatives(J, J1, J2, metric), 1.0, 1e-3)
    nh = integrate(nhp_rhs, NhpState(J, J1, J2), 1.0, 1e-3)
    gap = max(
        float(np.max(np.abs(ep.block("xi") - nh.block("J")))),
        float(np.max(np.abs(ep.rotations() - nh.rotations()))),
    )
    assert gap <= 1e-9
    report(2, f"sup-norm gap ep2(identity) vs nhp = {gap:.3e} <= 1e-9")


def test_criterion_3_projection_equivalence():
    # flow equivalence holds exactly on the horizontally liftable class,
    # i.e. commuting generator data; on so(3) that means a single axis
    d = EY
    nhp = integrate(nhp_rhs, NhpState(0.8 * d, 0.5 * d, 0.3 * d), 1.0, 1e-3)
    sph = integrate(cubic_sphere_rhs, SphereCubicState(EZ, 0.8 * d, 0.5 * d, 0.3 * d), 1.0, 1e-3)
    gap = float(np.max(np.linalg.norm(nhp.rotations() @ EZ - sph.block("x"), axis=1)))
    assert gap <= 1e-7
    report(3, f"max |project(g(t)) - x(t)| = {gap:.3e} <= 1e-7")


def test_criterion_4_cubic_residual_convergence():
    # derivative magnitudes ~16 keep the h^4 truncation term of the
    # residual above the eps/h^4 stencil floor at the finest step
    state = rc.project_initial_data(EZ, 16.0 * EX, 16.0 * EY, [6.4, 0.0, 0.0])
    maxima = []
    for h in (4e-3, 2e-3, 1e-3):
        traj = integrate(cubic_sphere_rhs, state, 1.0, h)
        _, res = cubic_residual_sphere(traj)
        maxima.append(float(np.max(np.linalg.norm(res, axis=1))))
    orders = [np.log2(maxima[i] / maxima[i + 1]) for i in range(2)]
    assert min(orders) >= 3.5
    report(4, f"observed orders {orders[0]:.2f}, {orders[1]:.2f} >= 3.5")


def test_criterion_5_lifting_theorem():
    # forward: the closed-form liftable cubic certifies and lifts to an
    # exact group cubic
    a, b, c, d = 1.0, 0.5, 0.2, EY
    traj = liftable_cubic(EZ, d, a, b, c, 1.0, 1e-3)
    cert = liftability_certificate(traj)
    defects = max(max(cert.commutator_norms), max(cert.horizontality_defects))
    assert cert.verdict and defects <= 1e-8
    lift = horizontal_lift(traj, np.eye(3))
    nhp = integrate(nhp_rhs, NhpState(c * d, b * d, a * d), 1.0, 1e-3)
    lift_gap = float(np.max(np.abs(lift.rotations() - nhp.rotations())))
    assert lift_gap <= 1e-6

    # backward: generic data obstructs exactly and fails the certificate
    generic = SphereCubicState(EZ, EX, EY, EZ)
    obstruction = lift_obstruction(generic)
    assert obstruction == 1.0
    cert_bad = liftability_certificate(integrate(cubic_sphere_rhs, generic, 1.0, 1e-3))
    assert not cert_bad.verdict
    report(
        5,
        f"forward: defects {defects:.2e} <= 1e-8, lift gap {lift_gap:.2e} <= 1e-6; "
        f"backward: obstruction = {obstruction} exactly, verdict false",
    )


def test_criterion_6_ballistic_circles():
    s = rc.equal_norm_state(EX, EY, 1)
    traj = integrate(lp1_rhs, s, 2.0 * np.pi, 1e-3)
    radii = radius_about_axis(traj.block("x"), s.J + s.sigma_bar)
    radius_dev = float(np.max(np.abs(radii - 1.0 / np.sqrt(2.0))))
    assert radius_dev <= 1e-7
    worst_condition = max(
        rc.ballistic_cubic_condition(traj.state(i)) for i in range(0, len(traj), 25)
    )
    assert worst_condition <= 1e-10

    two_to_one = rc.BallisticState(EX, EZ, 2.0 * EX)
    condition = rc.ballistic_cubic_condition(two_to_one)
    # the triple-bracket sum equals (|s|^2 - |J|^2)(J x s); for s = 2 e_x,
    # J = e_z this is 3 * 2 e_y.  (The norm-squared gap itself is 3.)
    assert condition == pytest.approx(6.0, abs=1e-12)
    gap = abs(np.linalg.norm(two_to_one.sigma_bar) ** 2 - np.linalg.norm(two_to_one.J) ** 2)
    assert gap == pytest.approx(3.0, abs=1e-12)
    assert rc.classify_s2(two_to_one) == rc.NON_CUBIC
    report(
        6,
        f"radius dev {radius_dev:.2e} <= 1e-7, condition along flow {worst_condition:.2e}; "
        f"2:1 case: condition {condition} (norm-sq gap {gap}), classified non-cubic",
    )


def test_criterion_7_curvature_formulas(rng):
    worst_group = 0.0
    worst_sphere = 0.0
    for _ in range(100):
        # orthonormal algebra pair for the group
        a = random_unit(rng)
        b = rng.normal(size=3)
        b = b - (b @ a) * a
        b /= np.linalg.norm(b)
        k_group = rc.curvature_group(a, b) @ b
        worst_group = max(worst_group, abs(k_group - 0.25))

        # orthonormal horizontal pair on the sphere
        x = random_unit(rng)
        xi = random_tangent(rng, x)
        eta = np.cross(x, xi)
        k_sphere = curvature_sphere(xi, eta, x) @ generator(eta, x)
        worst_sphere = max(worst_sphere, abs(k_sphere - 1.0))
    assert worst_group <= 1e-12
    assert worst_sphere <= 1e-12
    report(7, f"sectional dev: group {worst_group:.2e}, sphere {worst_sphere:.2e} <= 1e-12")


def test_criterion_8_lp_alpha_constancy():
    s = NhpState([0.5, 0.0, 0.8], [0.0, 0.3, 0.0], [0.1, 0.0, 0.0])
    traj = integrate(nhp_rhs, s, 1.0, 1e-3)
    result = lp2_residuals(reduced_samples(traj))
    assert result.alpha_std <= 1e-4
    report(8, f"std(alpha) = {result.alpha_std:.3e} <= 1e-4 (mean {result.alpha_mean:.3e})")


def test_criterion_9_bvp_plant_and_recover():
    rng = np.random.default_rng(7)
    worst_error = 0.0
    worst_iterations = 0
    for _ in range(20):
        x0 = random_unit(rng)
        v0 = random_tangent(rng, x0, scale=rng.uniform(0.3, 1.2))
        h1, h2 = tangent_basis(x0)
        z = rng.uniform(-1.0, 1.0, size=4)
        z *= rng.uniform(0.0, 1.5) / max(np.linalg.norm(z), 1e-12)
        state = rc.project_initial_data(x0, v0, z[0] * h1 + z[1] * h2, z[2] * h1 + z[3] * h2)
        dt = 1.0 / 200.0
        traj = integrate(cubic_sphere_rhs, state, 1.0, dt)
        end = traj.state(len(traj) - 1)
        problem = BvpProblem(
            "sphere", (x0, v0), (end.x, np.cross(end.J, end.x)), 1.0,
            shooting_tolerance=1e-8, max_iterations=25, dt=dt,
        )
        sol = shoot_sphere(problem)
        assert sol.converged
        assert sol.terminal_error <= 1e-6
        assert sol.iterations <= 25
        worst_error = max(worst_error, sol.terminal_error)
        worst_iterations = max(worst_iterations, sol.iterations)
    report(9, f"20 BVPs: worst error {worst_error:.2e} <= 1e-6, worst iterations {worst_iterations}")


def test_criterion_10_cli_determinism(tmp_path, capsys):
    def invocation(name, out_a, out_b):
        common = {
            "nhp": ["nhp", "--J", "0.3,-0.2,0.9", "--J1", "1,0,0.2", "--J2", "0,0.5,0",
                    "--t-final", "0.2", "--dt", "0.002"],
            "ep2": ["ep2", "--J", "0.3,-0.2,0.9", "--J1", "1,0,0.2", "--J2", "0,0.5,0",
                    "--metric", "1,0,0,2,0,3", "--t-final", "0.2", "--dt", "0.002"],
            "cubic-sphere": ["cubic-sphere", "--x", "0,0,1", "--v", "1,0,0", "--w2", "0,1,0",
                             "--t-final", "0.2", "--dt", "0.002"],
            "ballistic": ["ballistic", "--x", "1,0,0", "--v", "0,1,0", "--equal-norm", "+",
                          "--t-final", "0.2", "--dt", "0.002"],
            "plan": ["plan", "--space", "sphere", "--from", "0,0,1", "--v-from", "1.5708,0,0",
                     "--to", "1,0,0", "--v-to", "0,0,-1.5708", "--T", "1"],
        }
        return common[name]

    # commands producing files
    for name in ("nhp", "ep2", "cubic-sphere", "ballistic", "plan"):
        outputs = []
        stdouts = []
        for tag in ("a", "b"):
            out = tmp_path / f"{name}-{tag}.csv"
            argv = invocation(name, None, None) + ["--out", str(out)]
            assert cli_main(argv) == 0
            outputs.append(out.read_bytes())
            stdouts.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]
        assert stdouts[0] == stdouts[1]

    # pipeline commands reading files
    source = tmp_path / "src.csv"
    assert cli_main(["cubic-sphere", "--x", "0,0,1", "--v", "1,0,0", "--w2", "0,1,0",
                     "--t-final", "0.2", "--dt", "0.002", "--out", str(source)]) == 0
    capsys.readouterr()
    nhp_src = tmp_path / "nhp-src.csv"
    assert cli_main(["nhp", "--J", "0.5,0,0.8", "--J1", "0,0.3,0", "--J2", "0.1,0,0",
                     "--t-final", "0.2", "--dt", "0.002", "--out", str(nhp_src)]) == 0
    capsys.readouterr()
    pipelines = {
        "lift": ["lift", "--in", str(source)],
        "certify": ["certify", "--in", str(source)],
        "lp-check": ["lp-check", "--in", str(nhp_src)],
        "curvature": ["curvature", "--space", "sphere", "--xi", "1,0,0", "--eta", "0,1,0",
                      "--x", "0,0,1"],
    }
    for name, argv in pipelines.items():
        outputs = []
        stdouts = []
        for tag in ("a", "b"):
            full = list(argv)
            out = None
            if name == "lift":
                out = tmp_path / f"{name}-{tag}.csv"
                full += ["--out", str(out)]
            assert cli_main(full) == 0
            stdouts.append(capsys.readouterr().out)
            outputs.append(out.read_bytes() if out else b"")
        assert outputs[0] == outputs[1]
        assert stdouts[0] == stdouts[1]
    report(10, "all 9 subcommands byte-identical across repeated runs")
