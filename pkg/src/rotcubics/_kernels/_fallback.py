"""Pure-numpy twin of the compiled flow runners.

State layouts (flat float64 rows):
  nhp          [J 0:3, J' 3:6, J'' 6:9, g 9:18 row-major]
  ep2          [xi 0:3, eta 3:6, m 6:9, g 9:18]
  sphere_cubic [x 0:3, J 3:6, J' 6:9, J'' 9:12]
  lp1          [x 0:3, J 3:6, sigma 6:9]
  lift         [g 0:9]

Each runner takes the initial row, steps classical RK4 with the given fixed
dt, applies the flavor's projection (polar for rotation factors, unit-norm
for sphere points) after every step, and records every state.  It returns
(k, out) where k is the number of completed steps; rows [0, k] of `out` are
valid and k < n_steps signals a non-finite abort.
"""

import numpy as np


def _polar(g):
    """Project a near-rotation 3x3 matrix to SO(3) (Newton polar iteration)."""
    x = g
    for _ in range(8):
        if np.linalg.norm(x @ x.T - np.eye(3)) < 1e-14:
            break
        x = 0.5 * (x + np.linalg.inv(x).T)
    return x


def _project_g(y, offset):
    g = y[offset : offset + 9].reshape(3, 3)
    y[offset : offset + 9] = _polar(g).reshape(9)


def _project_x(y, offset):
    n = np.linalg.norm(y[offset : offset + 3])
    if n > 0.0:
        y[offset : offset + 3] /= n


def _rk4(rhs, y0, n_steps, dt, project):
    y = np.array(y0, dtype=float).copy()
    out = np.zeros((n_steps + 1, y.size))
    out[0] = y
    with np.errstate(invalid="ignore", over="ignore"):
        for k in range(n_steps):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * dt * k1)
            k3 = rhs(y + 0.5 * dt * k2)
            k4 = rhs(y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if project is not None:
                project(y)
            if not np.all(np.isfinite(y)):
                return k, out
            out[k + 1] = y
    return n_steps, out


def _dg_flat(omega, gflat):
    g = gflat.reshape(3, 3)
    return np.cross(omega[:, None], g, axis=0).reshape(9)


def run_nhp(y0, n_steps, dt, project=True):
    def rhs(y):
        d = np.empty(18)
        d[0:3] = y[3:6]
        d[3:6] = y[6:9]
        d[6:9] = np.cross(y[0:3], y[6:9])
        d[9:18] = _dg_flat(y[0:3], y[9:18])
        return d

    return _rk4(rhs, y0, n_steps, dt, (lambda y: _project_g(y, 9)) if project else None)


def run_ep2(y0, n_steps, dt, metric, metric_inv, project=True):
    I = np.asarray(metric, dtype=float)
    Iinv = np.asarray(metric_inv, dtype=float)

    def ad_dagger(nu, kappa):
        return Iinv @ np.cross(I @ kappa, nu)

    def rhs(y):
        xi, eta, m = y[0:3], y[3:6], y[6:9]
        d = np.empty(18)
        d[0:3] = eta - ad_dagger(xi, xi)
        d[3:6] = Iinv @ (m + I @ np.cross(xi, eta) - np.cross(I @ xi, eta))
        d[6:9] = np.cross(xi, m)
        d[9:18] = _dg_flat(xi, y[9:18])
        return d

    return _rk4(rhs, y0, n_steps, dt, (lambda y: _project_g(y, 9)) if project else None)


def run_sphere_cubic(y0, n_steps, dt, project=True):
    def rhs(y):
        d = np.empty(12)
        d[0:3] = np.cross(y[3:6], y[0:3])
        d[3:6] = y[6:9]
        d[6:9] = y[9:12]
        d[9:12] = 2.0 * np.cross(y[3:6], y[9:12])
        return d

    return _rk4(rhs, y0, n_steps, dt, (lambda y: _project_x(y, 0)) if project else None)


def run_lp1(y0, n_steps, dt, project=True):
    def rhs(y):
        d = np.empty(9)
        d[0:3] = np.cross(y[3:6], y[0:3])
        d[3:6] = np.cross(y[6:9], y[3:6])
        d[6:9] = np.cross(y[3:6], y[6:9])
        return d

    return _rk4(rhs, y0, n_steps, dt, (lambda y: _project_x(y, 0)) if project else None)


def _midpoint(jbar, k):
    """J at the RK4 midpoint stage, interpolated to the scheme's order.

    Cubic 4-point interpolation in the interior (linear averaging would cap
    the lift at 2nd order); one-sided quadratics at the series ends.
    """
    n = jbar.shape[0] - 1
    if 1 <= k <= n - 2:
        return (9.0 * (jbar[k] + jbar[k + 1]) - (jbar[k - 1] + jbar[k + 2])) / 16.0
    if k == 0 and n >= 2:
        return 0.375 * jbar[0] + 0.75 * jbar[1] - 0.125 * jbar[2]
    if k == n - 1 and n >= 2:
        return -0.125 * jbar[k - 1] + 0.75 * jbar[k] + 0.375 * jbar[k + 1]
    return 0.5 * (jbar[k] + jbar[k + 1])


def run_lift(jbar, g0, dt, project=True):
    """Integrate gdot = hat(J(t)) g with J given on the step grid.

    RK4 stage values of J use the grid endpoints and an interpolated
    midpoint (see _midpoint).
    """
    jbar = np.asarray(jbar, dtype=float)
    n_steps = jbar.shape[0] - 1
    y = np.array(g0, dtype=float).reshape(9).copy()
    out = np.zeros((n_steps + 1, 9))
    out[0] = y
    with np.errstate(invalid="ignore", over="ignore"):
        for k in range(n_steps):
            ja, jb = jbar[k], jbar[k + 1]
            jm = _midpoint(jbar, k)
            k1 = _dg_flat(ja, y)
            k2 = _dg_flat(jm, y + 0.5 * dt * k1)
            k3 = _dg_flat(jm, y + 0.5 * dt * k2)
            k4 = _dg_flat(jb, y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if project:
                _project_g(y, 0)
            if not np.all(np.isfinite(y)):
                return k, out
            out[k + 1] = y
    return n_steps, out
