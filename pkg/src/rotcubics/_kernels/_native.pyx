# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _fallback: fixed-step RK4 for the built-in flows.

State layouts and projection semantics match _fallback exactly; see there
for documentation.  All runners return (k, out) with k completed steps.
"""

import numpy as np

from libc.math cimport isfinite, sqrt


cdef inline void cross3(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void matvec3(const double* m, const double* v, double* out) noexcept nogil:
    cdef int i
    for i in range(3):
        out[i] = m[3 * i] * v[0] + m[3 * i + 1] * v[1] + m[3 * i + 2] * v[2]


cdef inline void dg_flat(const double* omega, const double* g, double* out) noexcept nogil:
    # columns of dg are omega x (columns of g)
    cdef double col[3]
    cdef double res[3]
    cdef int j, i
    for j in range(3):
        for i in range(3):
            col[i] = g[3 * i + j]
        cross3(omega, col, res)
        for i in range(3):
            out[3 * i + j] = res[i]


cdef inline int inv3(const double* m, double* out) noexcept nogil:
    cdef double det = (
        m[0] * (m[4] * m[8] - m[5] * m[7])
        - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
    )
    if det == 0.0 or not isfinite(det):
        return 1
    cdef double inv_det = 1.0 / det
    out[0] = (m[4] * m[8] - m[5] * m[7]) * inv_det
    out[1] = (m[2] * m[7] - m[1] * m[8]) * inv_det
    out[2] = (m[1] * m[5] - m[2] * m[4]) * inv_det
    out[3] = (m[5] * m[6] - m[3] * m[8]) * inv_det
    out[4] = (m[0] * m[8] - m[2] * m[6]) * inv_det
    out[5] = (m[2] * m[3] - m[0] * m[5]) * inv_det
    out[6] = (m[3] * m[7] - m[4] * m[6]) * inv_det
    out[7] = (m[1] * m[6] - m[0] * m[7]) * inv_det
    out[8] = (m[0] * m[4] - m[1] * m[3]) * inv_det
    return 0


cdef inline double ortho_defect(const double* g) noexcept nogil:
    # Frobenius norm of g g^T - I
    cdef double acc = 0.0
    cdef double entry
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            entry = -1.0 if i == j else 0.0
            for k in range(3):
                entry += g[3 * i + k] * g[3 * j + k]
            acc += entry * entry
    return sqrt(acc)


cdef inline void polar_project(double* g) noexcept nogil:
    # Newton iteration X <- (X + X^-T)/2 onto the orthogonal factor
    cdef double inv[9]
    cdef int it, i, j
    for it in range(8):
        if ortho_defect(g) < 1e-14:
            break
        if inv3(g, inv) != 0:
            return
        for i in range(3):
            for j in range(3):
                g[3 * i + j] = 0.5 * (g[3 * i + j] + inv[3 * j + i])


cdef inline void normalize3(double* x) noexcept nogil:
    cdef double n = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    if n > 0.0:
        x[0] /= n
        x[1] /= n
        x[2] /= n


cdef inline int all_finite(const double* y, int dim) noexcept nogil:
    cdef int i
    for i in range(dim):
        if not isfinite(y[i]):
            return 0
    return 1


# flow kinds
cdef enum:
    FLOW_NHP = 0
    FLOW_EP2 = 1
    FLOW_SPHERE = 2
    FLOW_LP1 = 3


cdef inline void eval_rhs(int kind, const double* y, const double* params, double* d) noexcept nogil:
    cdef double tmp[3]
    cdef double tmp2[3]
    if kind == FLOW_NHP:
        d[0] = y[3]; d[1] = y[4]; d[2] = y[5]
        d[3] = y[6]; d[4] = y[7]; d[5] = y[8]
        cross3(y, y + 6, d + 6)
        dg_flat(y, y + 9, d + 9)
    elif kind == FLOW_EP2:
        # params: metric (9), metric inverse (9)
        # dxi = eta - Iinv ((I xi) x xi)
        matvec3(params, y, tmp)
        cross3(tmp, y, tmp2)
        matvec3(params + 9, tmp2, d)
        d[0] = y[3] - d[0]; d[1] = y[4] - d[1]; d[2] = y[5] - d[2]
        # deta = Iinv (m + I (xi x eta) - (I xi) x eta)
        cross3(y, y + 3, tmp2)
        matvec3(params, tmp2, d + 3)          # I (xi x eta), staging in d[3:6]
        matvec3(params, y, tmp)               # I xi
        cross3(tmp, y + 3, tmp2)              # (I xi) x eta
        tmp[0] = y[6] + d[3] - tmp2[0]
        tmp[1] = y[7] + d[4] - tmp2[1]
        tmp[2] = y[8] + d[5] - tmp2[2]
        matvec3(params + 9, tmp, d + 3)
        # dm = xi x m
        cross3(y, y + 6, d + 6)
        dg_flat(y, y + 9, d + 9)
    elif kind == FLOW_SPHERE:
        cross3(y + 3, y, d)
        d[3] = y[6]; d[4] = y[7]; d[5] = y[8]
        d[6] = y[9]; d[7] = y[10]; d[8] = y[11]
        cross3(y + 3, y + 9, d + 9)
        d[9] *= 2.0; d[10] *= 2.0; d[11] *= 2.0
    else:  # FLOW_LP1
        cross3(y + 3, y, d)
        cross3(y + 6, y + 3, d + 3)
        cross3(y + 3, y + 6, d + 6)


cdef int run_flow(int kind, int dim, double[:] y0, int n_steps, double dt,
                  const double* params, int project, double[:, :] out) noexcept nogil:
    cdef double y[18]
    cdef double yt[18]
    cdef double k1[18]
    cdef double k2[18]
    cdef double k3[18]
    cdef double k4[18]
    cdef int i, k
    for i in range(dim):
        y[i] = y0[i]
        out[0, i] = y[i]
    for k in range(n_steps):
        eval_rhs(kind, y, params, k1)
        for i in range(dim):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        eval_rhs(kind, yt, params, k2)
        for i in range(dim):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        eval_rhs(kind, yt, params, k3)
        for i in range(dim):
            yt[i] = y[i] + dt * k3[i]
        eval_rhs(kind, yt, params, k4)
        for i in range(dim):
            y[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if project:
            if kind == FLOW_NHP or kind == FLOW_EP2:
                polar_project(y + 9)
            else:
                normalize3(y)
        if not all_finite(y, dim):
            return k
        for i in range(dim):
            out[k + 1, i] = y[i]
    return n_steps


def run_nhp(y0, int n_steps, double dt, bint project=True):
    cdef double[:] y = np.ascontiguousarray(y0, dtype=np.float64)
    out = np.zeros((n_steps + 1, 18))
    cdef double[:, :] out_view = out
    cdef int k = run_flow(FLOW_NHP, 18, y, n_steps, dt, NULL, project, out_view)
    return k, out


def run_ep2(y0, int n_steps, double dt, metric, metric_inv, bint project=True):
    cdef double[:] y = np.ascontiguousarray(y0, dtype=np.float64)
    params_arr = np.concatenate(
        [np.asarray(metric, dtype=np.float64).reshape(9),
         np.asarray(metric_inv, dtype=np.float64).reshape(9)]
    )
    cdef double[:] params = params_arr
    out = np.zeros((n_steps + 1, 18))
    cdef double[:, :] out_view = out
    cdef int k = run_flow(FLOW_EP2, 18, y, n_steps, dt, &params[0], project, out_view)
    return k, out


def run_sphere_cubic(y0, int n_steps, double dt, bint project=True):
    cdef double[:] y = np.ascontiguousarray(y0, dtype=np.float64)
    out = np.zeros((n_steps + 1, 12))
    cdef double[:, :] out_view = out
    cdef int k = run_flow(FLOW_SPHERE, 12, y, n_steps, dt, NULL, project, out_view)
    return k, out


def run_lp1(y0, int n_steps, double dt, bint project=True):
    cdef double[:] y = np.ascontiguousarray(y0, dtype=np.float64)
    out = np.zeros((n_steps + 1, 9))
    cdef double[:, :] out_view = out
    cdef int k = run_flow(FLOW_LP1, 9, y, n_steps, dt, NULL, project, out_view)
    return k, out


def run_lift(jbar, g0, double dt, bint project=True):
    cdef double[:, :] j = np.ascontiguousarray(jbar, dtype=np.float64)
    cdef int n_steps = j.shape[0] - 1
    cdef double[:] g0v = np.ascontiguousarray(g0, dtype=np.float64).reshape(9)
    out = np.zeros((n_steps + 1, 9))
    cdef double[:, :] out_view = out
    cdef double y[9]
    cdef double yt[9]
    cdef double k1[9]
    cdef double k2[9]
    cdef double k3[9]
    cdef double k4[9]
    cdef double jm[3]
    cdef int i, k, done = n_steps
    with nogil:
        for i in range(9):
            y[i] = g0v[i]
            out_view[0, i] = y[i]
        for k in range(n_steps):
            # midpoint stage: cubic interpolation inside, quadratic at the ends
            if 1 <= k <= n_steps - 2:
                for i in range(3):
                    jm[i] = (9.0 * (j[k, i] + j[k + 1, i]) - (j[k - 1, i] + j[k + 2, i])) / 16.0
            elif k == 0 and n_steps >= 2:
                for i in range(3):
                    jm[i] = 0.375 * j[0, i] + 0.75 * j[1, i] - 0.125 * j[2, i]
            elif k == n_steps - 1 and n_steps >= 2:
                for i in range(3):
                    jm[i] = -0.125 * j[k - 1, i] + 0.75 * j[k, i] + 0.375 * j[k + 1, i]
            else:
                for i in range(3):
                    jm[i] = 0.5 * (j[k, i] + j[k + 1, i])
            dg_flat(&j[k, 0], y, k1)
            for i in range(9):
                yt[i] = y[i] + 0.5 * dt * k1[i]
            dg_flat(jm, yt, k2)
            for i in range(9):
                yt[i] = y[i] + 0.5 * dt * k2[i]
            dg_flat(jm, yt, k3)
            for i in range(9):
                yt[i] = y[i] + dt * k3[i]
            dg_flat(&j[k + 1, 0], yt, k4)
            for i in range(9):
                y[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if project:
                polar_project(y)
            if not all_finite(y, 9):
                done = k
                break
            for i in range(9):
                out_view[k + 1, i] = y[i]
    return done, out
