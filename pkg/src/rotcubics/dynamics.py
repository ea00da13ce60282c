"""State types, right-hand sides and the fixed-step integrator.

Flows are integrated with classical RK4 plus a per-step projection (polar
for rotation factors, renormalization for sphere points); structure
preservation is asserted by tests, not by construction.  Known flows run on
the compiled kernel backend; arbitrary right-hand sides fall back to a
generic python loop with identical stepping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .lie_core import (
    Metric,
    ad_dagger,
    ad_star,
    as_vector3,
    bracket,
    flat,
    hat,
    project_so3,
    require_rotation,
    sharp,
)
from .sphere import require_sphere_point, tangent_part

# orthonormality drift allowed on states coming out of long integrations
# (re-projection happens every step, this is a sanity bound, not a target)
GROUP_DRIFT_TOL = 1e-7
CONSTRAINT_TOL = 1e-8


class IntegrationAbort(RuntimeError):
    """The flow produced a non-finite state; carries the last valid time."""

    def __init__(self, time: float, trajectory: "Trajectory | None"):
        super().__init__(f"non-finite state encountered at t = {time}")
        self.time = time
        self.trajectory = trajectory


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class NhpState:
    """Jet state (J, J', J'') of the bi-invariant group cubic plus reconstruction."""

    J: np.ndarray
    J1: np.ndarray
    J2: np.ndarray
    g: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "J", as_vector3(self.J, "J"))
        object.__setattr__(self, "J1", as_vector3(self.J1, "J1"))
        object.__setattr__(self, "J2", as_vector3(self.J2, "J2"))
        object.__setattr__(self, "g", require_rotation(self.g, GROUP_DRIFT_TOL, "g"))


@dataclass(frozen=True)
class Ep2State:
    """First-order variables (xi, eta, m) of the general-metric group cubic.

    eta = xi' + ad+_xi xi and m is the bracketed momentum whose transport
    equation closes the system; with the identity metric the flow coincides
    with the NhpState flow.
    """

    xi: np.ndarray
    eta: np.ndarray
    m: np.ndarray
    g: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "xi", as_vector3(self.xi, "xi"))
        object.__setattr__(self, "eta", as_vector3(self.eta, "eta"))
        object.__setattr__(self, "m", as_vector3(self.m, "m"))
        object.__setattr__(self, "g", require_rotation(self.g, GROUP_DRIFT_TOL, "g"))


@dataclass(frozen=True)
class SphereCubicState:
    """Sphere cubic jet (x, J, J', J'') with horizontality constraints.

    J and J' must be horizontal at x and the vertical part of J'' + [J', J]
    must vanish; the flow preserves but does not restore these.
    """

    x: np.ndarray
    J: np.ndarray
    J1: np.ndarray
    J2: np.ndarray

    def __post_init__(self):
        x = require_sphere_point(self.x)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "J", as_vector3(self.J, "J"))
        object.__setattr__(self, "J1", as_vector3(self.J1, "J1"))
        object.__setattr__(self, "J2", as_vector3(self.J2, "J2"))
        for name, vertical in (
            ("J", self.J @ x),
            ("J1", self.J1 @ x),
            ("J2 + [J1, J]", (self.J2 + bracket(self.J1, self.J)) @ x),
        ):
            if abs(float(vertical)) > CONSTRAINT_TOL:
                raise ValueError(
                    f"sphere cubic state violates horizontality: V_x({name}) = {float(vertical):.3e}"
                )


@dataclass(frozen=True)
class BallisticState:
    """Reduced geodesic variables (x, J, sigma_bar) on the sphere.

    sigma_bar is the vertical algebra component, kept as a full 3-vector
    constrained parallel to x; the scalar of the reduced picture is
    sigma_bar . x.
    """

    x: np.ndarray
    J: np.ndarray
    sigma_bar: np.ndarray

    def __post_init__(self):
        x = require_sphere_point(self.x)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "J", as_vector3(self.J, "J"))
        object.__setattr__(self, "sigma_bar", as_vector3(self.sigma_bar, "sigma_bar"))
        if abs(float(self.J @ x)) > CONSTRAINT_TOL:
            raise ValueError("ballistic state: J must be horizontal at x")
        if np.linalg.norm(tangent_part(x, self.sigma_bar)) > CONSTRAINT_TOL:
            raise ValueError("ballistic state: sigma_bar must be parallel to x")


# ---------------------------------------------------------------------------
# flavors: packing, columns, projection


def _vec_cols(name: str) -> tuple[str, ...]:
    return tuple(f"{name}{i}" for i in (1, 2, 3))


_G_COLS = tuple(f"g{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3))


def _raw_state(cls, **fields):
    """Construct a state dataclass bypassing validation (integrator stages)."""
    obj = object.__new__(cls)
    for name, value in fields.items():
        object.__setattr__(obj, name, value)
    return obj


def _pack_nhp(s: NhpState) -> np.ndarray:
    return np.concatenate([s.J, s.J1, s.J2, np.asarray(s.g, dtype=float).reshape(9)])


def _unpack_nhp(row: np.ndarray) -> NhpState:
    return NhpState(row[0:3], row[3:6], row[6:9], row[9:18].reshape(3, 3))


def _unpack_nhp_raw(row: np.ndarray) -> NhpState:
    return _raw_state(NhpState, J=row[0:3], J1=row[3:6], J2=row[6:9], g=row[9:18].reshape(3, 3))


def _pack_ep2(s: Ep2State) -> np.ndarray:
    return np.concatenate([s.xi, s.eta, s.m, np.asarray(s.g, dtype=float).reshape(9)])


def _unpack_ep2(row: np.ndarray) -> Ep2State:
    return Ep2State(row[0:3], row[3:6], row[6:9], row[9:18].reshape(3, 3))


def _unpack_ep2_raw(row: np.ndarray) -> Ep2State:
    return _raw_state(Ep2State, xi=row[0:3], eta=row[3:6], m=row[6:9], g=row[9:18].reshape(3, 3))


def _pack_sphere_cubic(s: SphereCubicState) -> np.ndarray:
    return np.concatenate([s.x, s.J, s.J1, s.J2])


def _unpack_sphere_cubic(row: np.ndarray) -> SphereCubicState:
    return SphereCubicState(row[0:3], row[3:6], row[6:9], row[9:12])


def _unpack_sphere_cubic_raw(row: np.ndarray) -> SphereCubicState:
    return _raw_state(SphereCubicState, x=row[0:3], J=row[3:6], J1=row[6:9], J2=row[9:12])


def _pack_ballistic(s: BallisticState) -> np.ndarray:
    return np.concatenate([s.x, s.J, s.sigma_bar])


def _unpack_ballistic(row: np.ndarray) -> BallisticState:
    return BallisticState(row[0:3], row[3:6], row[6:9])


def _unpack_ballistic_raw(row: np.ndarray) -> BallisticState:
    return _raw_state(BallisticState, x=row[0:3], J=row[3:6], sigma_bar=row[6:9])


def _project_g_at(offset: int) -> Callable[[np.ndarray], None]:
    def proj(y: np.ndarray) -> None:
        y[offset : offset + 9] = project_so3(y[offset : offset + 9].reshape(3, 3)).reshape(9)

    return proj


def _normalize_x(y: np.ndarray) -> None:
    n = np.linalg.norm(y[0:3])
    if n > 0.0:
        y[0:3] /= n


@dataclass(frozen=True)
class _Flavor:
    name: str
    columns: tuple[str, ...]
    pack: Callable
    unpack: Callable
    project: Callable[[np.ndarray], None] | None
    unpack_raw: Callable = None

    def __post_init__(self):
        if self.unpack_raw is None:
            object.__setattr__(self, "unpack_raw", self.unpack)


FLAVORS: dict[str, _Flavor] = {}


def register_flavor(flavor: _Flavor) -> None:
    FLAVORS[flavor.name] = flavor


register_flavor(
    _Flavor("nhp", _vec_cols("J") + _vec_cols("dJ") + _vec_cols("ddJ") + _G_COLS,
            _pack_nhp, _unpack_nhp, _project_g_at(9), _unpack_nhp_raw)
)
register_flavor(
    _Flavor("ep2", _vec_cols("xi") + _vec_cols("eta") + _vec_cols("m") + _G_COLS,
            _pack_ep2, _unpack_ep2, _project_g_at(9), _unpack_ep2_raw)
)
register_flavor(
    _Flavor("sphere_cubic", _vec_cols("x") + _vec_cols("J") + _vec_cols("dJ") + _vec_cols("ddJ"),
            _pack_sphere_cubic, _unpack_sphere_cubic, _normalize_x, _unpack_sphere_cubic_raw)
)
register_flavor(
    _Flavor("ballistic", _vec_cols("x") + _vec_cols("J") + _vec_cols("sig"),
            _pack_ballistic, _unpack_ballistic, _normalize_x, _unpack_ballistic_raw)
)
register_flavor(
    _Flavor("group", _G_COLS,
            lambda g: np.asarray(g, dtype=float).reshape(9),
            lambda row: row.reshape(3, 3), _project_g_at(0))
)
register_flavor(
    _Flavor("sphere", _vec_cols("x"),
            lambda x: np.asarray(x, dtype=float),
            lambda row: row.copy(), _normalize_x)
)
register_flavor(
    _Flavor("sphere_path", _vec_cols("x") + _vec_cols("J"),
            lambda xj: np.concatenate([xj[0], xj[1]]),
            lambda row: (row[0:3], row[3:6]), _normalize_x)
)


# ---------------------------------------------------------------------------
# trajectory


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled flow states, one packed row per sample.

    `columns` starts with the flavor's state layout; extra derived columns
    (for instance a radius column appended by the CLI) may follow.
    """

    flavor: str
    t0: float
    dt: float
    data: np.ndarray
    columns: tuple[str, ...] = ()

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown trajectory flavor {self.flavor!r}")
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        schema = FLAVORS[self.flavor].columns
        cols = tuple(self.columns) if self.columns else schema
        if cols[: len(schema)] != schema:
            raise ValueError(f"columns do not start with the {self.flavor!r} layout")
        object.__setattr__(self, "columns", cols)
        if data.ndim != 2 or data.shape[1] != len(cols):
            raise ValueError("trajectory data must be (n_samples, n_columns)")
        if data.shape[0] < 2:
            raise ValueError("a trajectory needs at least 2 samples")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def t_final(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    def state(self, i: int):
        return FLAVORS[self.flavor].unpack(self.data[i])

    def states(self):
        for i in range(len(self)):
            yield self.state(i)

    def block(self, name: str) -> np.ndarray:
        """The (n, 3) column block of a vector quantity, e.g. "x" or "J"."""
        want = _vec_cols(name)
        try:
            i = self.columns.index(want[0])
        except ValueError:
            raise KeyError(f"trajectory has no {name!r} block") from None
        if self.columns[i : i + 3] != want:
            raise KeyError(f"trajectory has no contiguous {name!r} block")
        return self.data[:, i : i + 3]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def rotations(self) -> np.ndarray:
        """The (n, 3, 3) rotation block for group-carrying flavors."""
        i = self.columns.index("g11")
        return self.data[:, i : i + 9].reshape(len(self), 3, 3)


# ---------------------------------------------------------------------------
# right-hand sides


class NhpDeriv(NamedTuple):
    J: np.ndarray
    J1: np.ndarray
    J2: np.ndarray
    g: np.ndarray


def nhp_rhs(s: NhpState) -> NhpDeriv:
    """NHP flow J''' + [J'', J] = 0 with reconstruction g' g^-1 = hat(J)."""
    return NhpDeriv(s.J1, s.J2, bracket(s.J, s.J2), hat(s.J) @ s.g)


nhp_rhs.flavor = "nhp"


def lie_quadratic(s: NhpState) -> np.ndarray:
    """First integral nu = J'' + [J', J] of the NHP equation."""
    return s.J2 + bracket(s.J1, s.J)


class Ep2Deriv(NamedTuple):
    xi: np.ndarray
    eta: np.ndarray
    m: np.ndarray
    g: np.ndarray


def ep2_rhs(s: Ep2State, metric: Metric) -> Ep2Deriv:
    """General-metric group cubic as a first-order system in (xi, eta, m)."""
    dxi = s.eta - ad_dagger(s.xi, s.xi, metric)
    deta = sharp(s.m + flat(bracket(s.xi, s.eta), metric) - ad_star(s.eta, flat(s.xi, metric)), metric)
    dm = -ad_star(s.xi, s.m)
    return Ep2Deriv(dxi, deta, dm, hat(s.xi) @ s.g)


class Ep2Flow:
    """ep2_rhs bound to a metric, usable as an `integrate` right-hand side."""

    flavor = "ep2"

    def __init__(self, metric: Metric):
        self.metric = metric

    def __call__(self, s: Ep2State) -> Ep2Deriv:
        return ep2_rhs(s, self.metric)


def ep2_state_from_derivatives(xi, xi_dot, xi_ddot, metric: Metric, g=None) -> Ep2State:
    """Build the (xi, eta, m) state from the jet (xi, xi', xi'') at t = 0."""
    xi = as_vector3(xi, "xi")
    xi_dot = as_vector3(xi_dot, "xi_dot")
    xi_ddot = as_vector3(xi_ddot, "xi_ddot")
    eta = xi_dot + ad_dagger(xi, xi, metric)
    eta_dot = xi_ddot + ad_dagger(xi_dot, xi, metric) + ad_dagger(xi, xi_dot, metric)
    m = flat(eta_dot, metric) - flat(bracket(xi, eta), metric) + ad_star(eta, flat(xi, metric))
    return Ep2State(xi, eta, m, np.eye(3) if g is None else g)


class SphereCubicDeriv(NamedTuple):
    x: np.ndarray
    J: np.ndarray
    J1: np.ndarray
    J2: np.ndarray


def cubic_sphere_rhs(s: SphereCubicState) -> SphereCubicDeriv:
    """Sphere cubic flow J''' + 2 [J'', J] = 0 with base transport x' = J x x."""
    return SphereCubicDeriv(np.cross(s.J, s.x), s.J1, s.J2, 2.0 * bracket(s.J, s.J2))


cubic_sphere_rhs.flavor = "sphere_cubic"


def project_initial_data(x, v, w2, w3) -> SphereCubicState:
    """Consistent sphere cubic initial state from raw jet data.

    J = x x v; J' is the horizontal part of w2; J'' takes the horizontal
    part of w3 plus exactly the vertical component that makes
    V_x(J'' + [J', J]) vanish.
    """
    x = require_sphere_point(x)
    v = as_vector3(v, "v")
    if abs(float(v @ x)) > CONSTRAINT_TOL:
        raise ValueError("project_initial_data: v is not tangent at x")
    v = tangent_part(x, v)
    j = np.cross(x, v)
    j1 = tangent_part(x, as_vector3(w2, "w2"))
    j2 = tangent_part(x, as_vector3(w3, "w3")) - float(bracket(j1, j) @ x) * x
    return SphereCubicState(x, j, j1, j2)


class BallisticDeriv(NamedTuple):
    x: np.ndarray
    J: np.ndarray
    sigma_bar: np.ndarray


def lp1_rhs(s: BallisticState) -> BallisticDeriv:
    """Reduced geodesic system J' = [sigma, J], sigma' = [J, sigma] on the sphere."""
    return BallisticDeriv(
        np.cross(s.J, s.x), bracket(s.sigma_bar, s.J), bracket(s.J, s.sigma_bar)
    )


lp1_rhs.flavor = "ballistic"


# ---------------------------------------------------------------------------
# integration


def step_count(t_final: float, dt: float) -> int:
    """floor(t_final / dt) with a tiny slack against floating-point shortfall."""
    return int(math.floor(t_final / dt + 1e-9))


def _kernel_call(rhs, y0: np.ndarray, n: int, dt: float, project: bool):
    """Run a built-in flow on the kernel backend; None for custom callables."""
    if rhs is nhp_rhs:
        return _kernels.run_nhp(y0, n, dt, project)
    if rhs is cubic_sphere_rhs:
        return _kernels.run_sphere_cubic(y0, n, dt, project)
    if rhs is lp1_rhs:
        return _kernels.run_lp1(y0, n, dt, project)
    if isinstance(rhs, Ep2Flow):
        metric = rhs.metric
        return _kernels.run_ep2(y0, n, dt, metric.matrix, metric.inverse, project)
    return None


def integrate(rhs, state, t_final: float, dt: float, *, project: bool = True) -> Trajectory:
    """Classical fixed-step RK4 of a flow, recording every step.

    `rhs` maps a state to its derivative.  The built-in flows (nhp_rhs,
    Ep2Flow, cubic_sphere_rhs, lp1_rhs) run on the kernel backend; any other
    callable must declare a known `flavor` attribute for state packing and
    is stepped by a generic python loop.  Group factors are re-projected to
    SO(3) and sphere points renormalized after each step unless `project`
    is disabled.

    Raises IntegrationAbort when a non-finite state appears.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if not t_final > 0.0:
        raise ValueError("t_final must be positive")
    if dt > t_final * (1.0 + 1e-12):
        raise ValueError("dt must not exceed t_final")
    flavor_name = getattr(rhs, "flavor", None)
    if flavor_name is None or flavor_name not in FLAVORS:
        raise ValueError("rhs does not advertise a known flow flavor")
    flavor = FLAVORS[flavor_name]
    n = step_count(t_final, dt)
    y0 = flavor.pack(state)

    result = _kernel_call(rhs, y0, n, dt, project)
    if result is not None:
        done, rows = result
    else:
        done, rows = _python_rk4(rhs, flavor, y0, n, dt, project)

    if done < n:
        partial = None
        if done >= 1:
            partial = Trajectory(flavor_name, 0.0, dt, rows[: done + 1])
        raise IntegrationAbort(done * dt, partial)
    return Trajectory(flavor_name, 0.0, dt, rows)


def _python_rk4(rhs, flavor: _Flavor, y0: np.ndarray, n: int, dt: float, project: bool):
    """Generic packed-state RK4 for right-hand sides without a kernel."""

    def f(y: np.ndarray) -> np.ndarray:
        return flavor.pack(rhs(flavor.unpack_raw(y)))

    rows = np.zeros((n + 1, y0.size))
    y = y0.copy()
    rows[0] = y
    for k in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if project and flavor.project is not None:
            flavor.project(y)
        if not np.all(np.isfinite(y)):
            return k, rows
        rows[k + 1] = y
    return n, rows
