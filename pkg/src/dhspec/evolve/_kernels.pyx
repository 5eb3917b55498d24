# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled residual and banded-Jacobian assembly.

Same functions, signatures and in-place outputs as ``_kernels_py``; see that
module for the discretization.
"""

import numpy as np

from libc.math cimport exp, pow


def assemble_upwind(double[::1] v, double[::1] v_old, double[::1] x, double[::1] cv,
                    double h, double dt, double m, double floor,
                    double[::1] R, double[:, ::1] ab):
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, f
    cdef double xi_l, xi_r, dxi_l, dxi_r, U, up, dFl, dFr, F, vl, vr
    for i in range(n):
        R[i] = cv[i] * (v[i] - v_old[i]) / dt
        ab[0, i] = 0.0
        ab[1, i] = cv[i] / dt
        ab[2, i] = 0.0
    vl = v[0]
    xi_l = m * pow(vl, m - 1) / (m - 1) + 0.5 * x[0] * x[0]
    dxi_l = m * pow(vl if vl > floor else floor, m - 2)
    for f in range(n - 1):
        vr = v[f + 1]
        xi_r = m * pow(vr, m - 1) / (m - 1) + 0.5 * x[f + 1] * x[f + 1]
        dxi_r = m * pow(vr if vr > floor else floor, m - 2)
        U = -(xi_r - xi_l) / h
        if U >= 0:
            up = vl
            dFl = up * dxi_l / h + U
            dFr = -up * dxi_r / h
        else:
            up = vr
            dFl = up * dxi_l / h
            dFr = -up * dxi_r / h + U
        F = U * up
        R[f] += F
        R[f + 1] -= F
        ab[1, f] += dFl
        ab[1, f + 1] -= dFr
        ab[0, f + 1] = dFr
        ab[2, f] = -dFl
        vl = vr
        xi_l = xi_r
        dxi_l = dxi_r


cdef inline void _stencil(Py_ssize_t i, Py_ssize_t n, double h, bint quadratic_ghost,
                          Py_ssize_t* j, double* c1, double* c2) noexcept nogil:
    cdef double ih = 1.0 / h
    cdef double ih2 = ih * ih
    if 0 < i < n - 1:
        j[0] = i - 1; j[1] = i; j[2] = i + 1
        c1[0] = -0.5 * ih; c1[1] = 0.0; c1[2] = 0.5 * ih
        c2[0] = ih2; c2[1] = -2.0 * ih2; c2[2] = ih2
        return
    if i == 0:
        j[0] = 0; j[1] = 1; j[2] = 2
        if quadratic_ghost:
            c1[0] = -1.5 * ih; c1[1] = 2.0 * ih; c1[2] = -0.5 * ih
            c2[0] = ih2; c2[1] = -2.0 * ih2; c2[2] = ih2
        else:
            c1[0] = 0.0; c1[1] = 0.0; c1[2] = 0.0
            c2[0] = -2.0 * ih2; c2[1] = 2.0 * ih2; c2[2] = 0.0
        return
    j[0] = n - 3; j[1] = n - 2; j[2] = n - 1
    if quadratic_ghost:
        c1[0] = 0.5 * ih; c1[1] = -2.0 * ih; c1[2] = 1.5 * ih
        c2[0] = ih2; c2[1] = -2.0 * ih2; c2[2] = ih2
    else:
        c1[0] = 0.0; c1[1] = 0.0; c1[2] = 0.0
        c2[0] = 0.0; c2[1] = 2.0 * ih2; c2[2] = -2.0 * ih2


def assemble_potential(double[::1] u, double[::1] v_old, double[::1] x, double[::1] cv,
                       double h, double dt, double c0, double theta, double a2, double a1,
                       bint logvar, bint quadratic_ghost, bint upwind,
                       double[::1] R, double[:, ::1] ab):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, f, k, col, side
    cdef Py_ssize_t j[3]
    cdef double c1[3]
    cdef double c2[3]
    cdef double D1, D2, mob, dmob_l, dmob_r, dxf, F, val, sgn
    # per-node potential, density and stencil derivatives
    cdef double[::1] xi = np.empty(n)
    cdef double[::1] v = np.empty(n)
    cdef double[::1] dv = np.empty(n)
    cdef double[:, ::1] dxi = np.empty((n, 3))
    cdef Py_ssize_t[:, ::1] idx = np.empty((n, 3), dtype=np.intp)

    for i in range(n):
        _stencil(i, n, h, quadratic_ghost, j, c1, c2)
        D1 = c1[0] * u[j[0]] + c1[1] * u[j[1]] + c1[2] * u[j[2]]
        D2 = c2[0] * u[j[0]] + c2[1] * u[j[1]] + c2[2] * u[j[2]]
        xi[i] = 0.5 * x[i] * x[i] + c0 * u[i] - theta * (a2 * D2 + a1 * D1 * D1)
        for k in range(3):
            idx[i, k] = j[k]
            dxi[i, k] = -theta * (a2 * c2[k] + 2.0 * a1 * D1 * c1[k])
            if j[k] == i:
                dxi[i, k] += c0
        if logvar:
            v[i] = exp(u[i])
            dv[i] = v[i]
        else:
            v[i] = u[i]
            dv[i] = 1.0

    for k in range(5):
        for i in range(n):
            ab[k, i] = 0.0
    for i in range(n):
        R[i] = cv[i] * (v[i] - v_old[i]) / dt
        ab[2, i] = cv[i] * dv[i] / dt

    for f in range(n - 1):
        dxf = (xi[f + 1] - xi[f]) / h
        if upwind:
            if dxf <= 0:
                mob = v[f]; dmob_l = dv[f]; dmob_r = 0.0
            else:
                mob = v[f + 1]; dmob_l = 0.0; dmob_r = dv[f + 1]
        else:
            mob = 0.5 * (v[f] + v[f + 1])
            dmob_l = 0.5 * dv[f]
            dmob_r = 0.5 * dv[f + 1]
        F = -mob * dxf
        R[f] += F
        R[f + 1] -= F
        # mobility part
        val = -dmob_l * dxf
        ab[2, f] += val
        ab[3, f] -= val
        val = -dmob_r * dxf
        ab[1, f + 1] += val
        ab[2, f + 1] -= val
        # potential part: +xi_{f+1}, -xi_f
        for side in range(2):
            i = f + 1 - side
            sgn = -mob / h if side == 0 else mob / h
            for k in range(3):
                col = idx[i, k]
                val = sgn * dxi[i, k]
                ab[2 + f - col, col] += val
                ab[3 + f - col, col] -= val
