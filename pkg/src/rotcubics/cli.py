"""Command-line front end: flows, lifts, certificates, LP checks, planning.

Trajectories go to files (CSV or JSON), reports (classifications,
certificates, alpha statistics, planning summaries) go to stdout as JSON.
Exit codes: 0 success, 2 validation error, 3 non-convergence, 4 numerical
abort or I/O failure.  Identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import ballistic as bal
from . import lifting, lp_reduction, planner, sphere
from .dynamics import (
    FLAVORS,
    BallisticState,
    Ep2Flow,
    IntegrationAbort,
    NhpState,
    Trajectory,
    cubic_sphere_rhs,
    ep2_state_from_derivatives,
    integrate,
    lp1_rhs,
    nhp_rhs,
    project_initial_data,
)
from .lie_core import ChartError, Metric, curvature_group, exp_so3
from .planner import BvpProblem, SegmentError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_NUMERICAL = 4


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_vec(text: str) -> np.ndarray:
    """Comma-separated triple; the single token "0" is the zero vector."""
    text = text.strip()
    if text == "0":
        return np.zeros(3)
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    try:
        vec = np.array([float(p) for p in parts])
    except ValueError:
        raise UsageError(f"could not parse vector {text!r}") from None
    if not np.all(np.isfinite(vec)):
        raise UsageError("vector entries must be finite")
    return vec


def parse_metric(text: str) -> Metric:
    """"identity" or the 6 upper-triangular entries m11,m12,m13,m22,m23,m33."""
    text = text.strip()
    if text == "identity":
        return Metric.identity()
    parts = text.split(",")
    if len(parts) != 6:
        raise UsageError("metric needs 6 comma-separated reals (upper triangle) or 'identity'")
    try:
        a, b, c, d, e, f = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"could not parse metric {text!r}") from None
    try:
        return Metric([[a, b, c], [b, d, e], [c, e, f]])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_rotation(text: str) -> np.ndarray:
    text = text.strip()
    if text == "identity":
        return np.eye(3)
    parts = text.split(",")
    if len(parts) != 9:
        raise UsageError("rotation needs 9 comma-separated reals (row-major) or 'identity'")
    try:
        g = np.array([float(p) for p in parts]).reshape(3, 3)
    except ValueError:
        raise UsageError(f"could not parse rotation {text!r}") from None
    return g


def frame_to(x: np.ndarray) -> np.ndarray:
    """A deterministic rotation sending e_z to the unit vector x."""
    ez = np.array([0.0, 0.0, 1.0])
    c = float(np.clip(x @ ez, -1.0, 1.0))
    if c > 1.0 - 1e-14:
        return np.eye(3)
    if c < -1.0 + 1e-14:
        return exp_so3(np.pi * np.array([1.0, 0.0, 0.0]))
    axis = np.cross(ez, x)
    axis /= np.linalg.norm(axis)
    return exp_so3(np.arccos(c) * axis)


# ---------------------------------------------------------------------------
# serialization


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def serialize_trajectory(traj: Trajectory, fmt: str, path: str) -> None:
    """Write a trajectory as CSV (header + one row per sample) or JSON."""
    if len(traj) < 1:
        raise ValueError("cannot serialize an empty trajectory")
    if fmt == "csv":
        lines = ["t," + ",".join(traj.columns)]
        for i in range(len(traj)):
            t = traj.t0 + i * traj.dt
            lines.append(",".join([_fmt(t)] + [_fmt(v) for v in traj.data[i]]))
        payload = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = json.dumps(
            {
                "flavor": traj.flavor,
                "t0": traj.t0,
                "dt": traj.dt,
                "columns": list(traj.columns),
                "rows": [[float(v) for v in row] for row in traj.data],
            }
        ) + "\n"
    else:
        raise UsageError(f"unknown format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(payload)


def _flavor_for_columns(columns: tuple[str, ...]) -> str:
    candidates = sorted(FLAVORS.values(), key=lambda f: -len(f.columns))
    for flavor in candidates:
        if columns[: len(flavor.columns)] == flavor.columns:
            return flavor.name
    raise UsageError(f"columns {columns[:4]}... match no known trajectory flavor")


def parse_trajectory(path: str) -> Trajectory:
    """Read a trajectory written by serialize_trajectory (CSV or JSON)."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return Trajectory(
            doc["flavor"], float(doc["t0"]), float(doc["dt"]),
            np.array(doc["rows"], dtype=float), tuple(doc["columns"]),
        )
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise UsageError("trajectory file needs a header and at least 2 samples")
    header = lines[0].split(",")
    if header[0] != "t":
        raise UsageError("first CSV column must be t")
    columns = tuple(header[1:])
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    t = rows[:, 0]
    dt = float(t[1] - t[0])
    if dt <= 0.0 or np.max(np.abs(np.diff(t) - dt)) > 1e-9 * max(1.0, abs(dt)):
        raise UsageError("trajectory file does not have a uniform time grid")
    return Trajectory(_flavor_for_columns(columns), float(t[0]), dt, rows[:, 1:], columns)


def _print_report(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")


def _check_out_path(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise UsageError(f"output directory does not exist: {parent}")
    if os.path.exists(path) and not os.access(path, os.W_OK):
        raise UsageError(f"output path is not writable: {path}")


# ---------------------------------------------------------------------------
# subcommands


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-final", type=float, required=True, help="integration horizon (seconds)")
    p.add_argument("--dt", type=float, required=True, help="fixed step size (seconds)")


def _add_out_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="trajectory output path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _cmd_nhp(args) -> int:
    state = NhpState(
        parse_vec(args.J), parse_vec(args.J1), parse_vec(args.J2), parse_rotation(args.g0)
    )
    traj = integrate(nhp_rhs, state, args.t_final, args.dt)
    _check_out_path(args.out)
    serialize_trajectory(traj, args.format, args.out)
    return EXIT_OK


def _cmd_ep2(args) -> int:
    metric = parse_metric(args.metric)
    state = ep2_state_from_derivatives(
        parse_vec(args.J), parse_vec(args.J1), parse_vec(args.J2), metric, parse_rotation(args.g0)
    )
    traj = integrate(Ep2Flow(metric), state, args.t_final, args.dt)
    _check_out_path(args.out)
    serialize_trajectory(traj, args.format, args.out)
    return EXIT_OK


def _cmd_cubic_sphere(args) -> int:
    state = project_initial_data(
        parse_vec(args.x), parse_vec(args.v), parse_vec(args.w2), parse_vec(args.w3)
    )
    traj = integrate(cubic_sphere_rhs, state, args.t_final, args.dt)
    _check_out_path(args.out)
    serialize_trajectory(traj, args.format, args.out)
    return EXIT_OK


def _cmd_ballistic(args) -> int:
    x = sphere.require_sphere_point(parse_vec(args.x))
    v = sphere.require_tangent(x, parse_vec(args.v), name="v")
    if args.equal_norm is not None:
        if args.sigma is not None:
            raise UsageError("give either --sigma or --equal-norm, not both")
        sign = 1 if args.equal_norm == "+" else -1
        state = bal.equal_norm_state(x, v, sign)
    else:
        sigma = args.sigma if args.sigma is not None else 0.0
        state = BallisticState(x, np.cross(x, v), sigma * x)
    traj = integrate(lp1_rhs, state, args.t_final, args.dt)
    xi = state.J + state.sigma_bar
    radius = bal.radius_about_axis(traj.block("x"), xi) if np.linalg.norm(xi) > 1e-15 else np.full(len(traj), np.nan)
    data = np.column_stack([traj.data, radius])
    traj = Trajectory(traj.flavor, traj.t0, traj.dt, data, traj.columns + ("radius",))
    _check_out_path(args.out)
    serialize_trajectory(traj, args.format, args.out)
    classification = bal.classify_s2(state)
    report = {
        "classification": classification,
        "cubic_condition": bal.ballistic_cubic_condition(state),
    }
    if classification == bal.EQUAL_NORM_CIRCLE:
        axis, r = bal.circle_parameters(x, v, 1 if (state.sigma_bar @ x) >= 0 else -1)
        report["circle_axis"] = list(axis)
        report["circle_radius"] = r
    _print_report(report)
    return EXIT_OK


def _cmd_lift(args) -> int:
    traj = parse_trajectory(args.infile)
    x0 = traj.block("x")[0]
    g0 = frame_to(x0 / np.linalg.norm(x0)) if args.g0 == "auto" else parse_rotation(args.g0)
    lifted = lifting.horizontal_lift(traj, g0)
    _check_out_path(args.out)
    serialize_trajectory(lifted, args.format, args.out)
    return EXIT_OK


def _cmd_certify(args) -> int:
    traj = parse_trajectory(args.infile)
    cert = lifting.liftability_certificate(traj)
    _print_report(cert.as_dict())
    return EXIT_OK


def _cmd_lp_check(args) -> int:
    traj = parse_trajectory(args.infile)
    samples = lp_reduction.reduced_samples(traj)
    result = lp_reduction.lp2_residuals(samples)
    sigma0 = samples[0].sigma
    _print_report(
        {
            "alpha_mean": result.alpha_mean,
            "alpha_std": result.alpha_std,
            "max_vector_residual": float(np.max(np.linalg.norm(result.vector_residuals, axis=1))),
            "samples": int(result.times.size),
            "sigma_initial": sigma0,
        }
    )
    return EXIT_OK


def _cmd_curvature(args) -> int:
    xi = parse_vec(args.xi)
    eta = parse_vec(args.eta)
    if args.space == "group":
        value = curvature_group(xi, eta)
        num = float(value @ eta)
        den = float((xi @ xi) * (eta @ eta) - (xi @ eta) ** 2)
    else:
        if args.x is None:
            raise UsageError("sphere curvature needs --x")
        x = sphere.require_sphere_point(parse_vec(args.x))
        value = sphere.curvature_sphere(xi, eta, x)
        xi_q = sphere.generator(xi, x)
        eta_q = sphere.generator(eta, x)
        num = float(value @ eta_q)
        den = float((xi_q @ xi_q) * (eta_q @ eta_q) - (xi_q @ eta_q) ** 2)
    report = {"value": list(value)}
    report["sectional"] = num / den if den > 1e-14 else None
    _print_report(report)
    return EXIT_OK


def _write_piecewise_csv(path: str, segments) -> None:
    columns = segments[0].columns
    lines = ["t," + ",".join(columns)]
    offset = 0.0
    for si, seg in enumerate(segments):
        start = 1 if si > 0 else 0
        for i in range(start, len(seg)):
            t = offset + i * seg.dt
            lines.append(",".join([_fmt(t)] + [_fmt(v) for v in seg.data[i]]))
        offset += seg.dt * (len(seg) - 1)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_plan(args) -> int:
    durations = [float(p) for p in str(args.T).split(",")]
    tol = args.tol
    if args.space == "group":
        if args.via:
            raise UsageError("waypoints are supported on the sphere only")
        if len(durations) != 1:
            raise UsageError("group planning takes a single duration")
        problem = BvpProblem(
            "group",
            (parse_rotation(getattr(args, "from")), parse_vec(args.v_from)),
            (parse_rotation(args.to), parse_vec(args.v_to)),
            durations[0],
            shooting_tolerance=tol,
            max_iterations=args.max_iter,
            dt=args.dt,
        )
        sol = planner.shoot_group(problem)
        if args.out:
            _check_out_path(args.out)
            serialize_trajectory(sol.trajectory, args.format, args.out)
        _print_report(
            {
                "converged": sol.converged,
                "iterations": sol.iterations,
                "terminal_error": sol.terminal_error,
                "unknowns": list(sol.unknowns),
            }
        )
        return EXIT_OK if sol.converged else EXIT_NO_CONVERGENCE
    points = [(parse_vec(getattr(args, "from")), parse_vec(args.v_from))]
    for via, v_via in zip(args.via or [], args.v_via or []):
        points.append((parse_vec(via), parse_vec(v_via)))
    points.append((parse_vec(args.to), parse_vec(args.v_to)))
    if len(args.via or []) != len(args.v_via or []):
        raise UsageError("each --via needs a matching --v-via")
    if len(durations) != len(points) - 1:
        raise UsageError(f"--T needs {len(points) - 1} comma-separated durations")
    path = planner.plan_waypoints(
        points, durations, shooting_tolerance=tol, max_iterations=args.max_iter, dt=args.dt
    )
    if args.out:
        _check_out_path(args.out)
        if len(path.segments) == 1:
            serialize_trajectory(path.segments[0], args.format, args.out)
        elif args.format == "csv":
            _write_piecewise_csv(args.out, path.segments)
        else:
            payload = {
                "segments": [
                    {
                        "flavor": seg.flavor,
                        "t0": seg.t0,
                        "dt": seg.dt,
                        "columns": list(seg.columns),
                        "rows": [[float(v) for v in row] for row in seg.data],
                    }
                    for seg in path.segments
                ]
            }
            with open(args.out, "w") as fh:
                fh.write(json.dumps(payload) + "\n")
    _print_report(
        {
            "converged": all(s.converged for s in path.solutions),
            "segments": [
                {
                    "iterations": s.iterations,
                    "terminal_error": s.terminal_error,
                    "unknowns": list(s.unknowns),
                }
                for s in path.solutions
            ],
            "junction_position_errors": list(path.junction_position_errors),
            "junction_velocity_errors": list(path.junction_velocity_errors),
        }
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotcubics",
        description="Riemannian cubics on SO(3) and the sphere: flows, lifts, planning.",
    )
    parser.add_argument("--config", help="JSON file of option defaults (long names)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nhp", help="bi-invariant group cubic flow")
    p.add_argument("--J", required=True)
    p.add_argument("--J1", required=True)
    p.add_argument("--J2", required=True)
    p.add_argument("--g0", default="identity")
    _add_grid_args(p)
    _add_out_args(p)
    p.set_defaults(func=_cmd_nhp)

    p = sub.add_parser("ep2", help="general-metric group cubic flow (xi, xi', xi'' data)")
    p.add_argument("--J", required=True, help="initial xi")
    p.add_argument("--J1", required=True, help="initial xi'")
    p.add_argument("--J2", required=True, help="initial xi''")
    p.add_argument("--metric", default="identity")
    p.add_argument("--g0", default="identity")
    _add_grid_args(p)
    _add_out_args(p)
    p.set_defaults(func=_cmd_ep2)

    p = sub.add_parser("cubic-sphere", help="sphere cubic flow")
    p.add_argument("--x", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--w2", default="0", help="raw J' data (projected to the constraints)")
    p.add_argument("--w3", default="0", help="raw J'' data (projected to the constraints)")
    _add_grid_args(p)
    _add_out_args(p)
    p.set_defaults(func=_cmd_cubic_sphere)

    p = sub.add_parser("ballistic", help="projected group geodesic (reduced flow)")
    p.add_argument("--x", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--sigma", type=float, default=None, help="vertical scalar sigma")
    p.add_argument("--equal-norm", choices=("+", "-"), default=None)
    _add_grid_args(p)
    _add_out_args(p)
    p.set_defaults(func=_cmd_ballistic)

    p = sub.add_parser("lift", help="horizontal lift of a sphere trajectory")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--g0", default="auto")
    _add_out_args(p)
    p.set_defaults(func=_cmd_lift)

    p = sub.add_parser("certify", help="liftability certificate of a sphere trajectory")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("lp-check", help="reduced-system residuals of a group trajectory")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=_cmd_lp_check)

    p = sub.add_parser("curvature", help="curvature-from-cubics evaluation")
    p.add_argument("--space", choices=("group", "sphere"), required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--x", default=None)
    p.set_defaults(func=_cmd_curvature)

    p = sub.add_parser("plan", help="two-point (or waypoint) cubic boundary-value planning")
    p.add_argument("--space", choices=("sphere", "group"), default="sphere")
    p.add_argument("--from", required=True)
    p.add_argument("--v-from", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--v-to", required=True)
    p.add_argument("--via", action="append")
    p.add_argument("--v-via", action="append")
    p.add_argument("--T", required=True, help="duration(s), comma-separated per segment")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=25)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_plan)

    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Expand --config FILE into leading flags so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"could not read config {path}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError("config must be a JSON object")
    flags: list[str] = []
    for key, value in config.items():
        flag = "--" + str(key).replace("_", "-")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        flags.append(flag)
        flags.append(str(value))
    if not rest:
        return flags
    # keep the subcommand first, then config defaults, then explicit flags
    return [rest[0]] + flags + rest[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return args.func(args)
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except SegmentError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NO_CONVERGENCE
    except (IntegrationAbort, ChartError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
