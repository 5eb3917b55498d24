"""Residual and banded-Jacobian assembly, numpy implementation.

Both kernels discretize a conservative flux form on a uniform node grid with
control volumes ``cv`` (``h`` inside, ``h/2`` at the ends) and zero flux at
both ends.  Implicit Euler: ``R_i = cv_i (v_i - v_old_i)/dt + F_{i+1/2} - F_{i-1/2}``.
Jacobians are written in the ``scipy.linalg.solve_banded`` layout
``ab[u + i - j, j] = J[i, j]``.

The compiled module ``_kernels`` exposes the same two functions with the
same signatures and in-place outputs.
"""

import numpy as np

__all__ = ["assemble_upwind", "assemble_potential"]


def assemble_upwind(v, v_old, x, cv, h, dt, m, floor, R, ab):
    """Porous-medium step for ``m > 1`` with upwinded mobility.

    Potential ``xi = m v^(m-1)/(m-1) + x^2/2``; face velocity
    ``U = -(xi_{i+1} - xi_i)/h``; flux ``F = U v_upwind``.  ``ab`` has
    shape ``(3, n)``.  ``floor`` bounds ``v`` from below in ``dxi/dv`` only.
    """
    n = v.shape[0]
    xi = m * v ** (m - 1) / (m - 1) + 0.5 * x * x
    dxi = m * np.maximum(v, floor) ** (m - 2)
    U = -(xi[1:] - xi[:-1]) / h
    fwd = U >= 0
    up = np.where(fwd, v[:-1], v[1:])
    F = U * up
    # dF/dv_left, dF/dv_right
    dUl = dxi[:-1] / h
    dUr = -dxi[1:] / h
    dFl = up * dUl + np.where(fwd, U, 0.0)
    dFr = up * dUr + np.where(fwd, 0.0, U)

    R[:] = cv * (v - v_old) / dt
    R[:-1] += F
    R[1:] -= F

    ab[:] = 0.0
    ab[1, :] = cv / dt
    ab[1, :-1] += dFl          # row f, col f
    ab[1, 1:] -= dFr           # row f+1, col f+1
    ab[0, 1:] = dFr            # row f, col f+1
    ab[2, :-1] = -dFl          # row f+1, col f
    return None


def _stencils(n, h, quadratic_ghost):
    idx = np.empty((n, 3), dtype=np.int64)
    d1 = np.empty((n, 3))
    d2 = np.empty((n, 3))
    i = np.arange(1, n - 1)
    idx[1:-1] = np.stack([i - 1, i, i + 1], axis=1)
    d1[1:-1] = [-0.5 / h, 0.0, 0.5 / h]
    d2[1:-1] = [1 / h**2, -2 / h**2, 1 / h**2]
    idx[0] = [0, 1, 2]
    idx[-1] = [n - 3, n - 2, n - 1]
    if quadratic_ghost:
        d1[0] = [-1.5 / h, 2.0 / h, -0.5 / h]
        d1[-1] = [0.5 / h, -2.0 / h, 1.5 / h]
        d2[0] = d2[-1] = [1 / h**2, -2 / h**2, 1 / h**2]
    else:
        d1[0] = d1[-1] = 0.0
        d2[0] = [-2 / h**2, 2 / h**2, 0.0]
        d2[-1] = [0.0, 2 / h**2, -2 / h**2]
    return idx, d1, d2


def assemble_potential(u, v_old, x, cv, h, dt, c0, theta, a2, a1, logvar, quadratic_ghost, upwind, R, ab):
    """Gradient-flow step ``F = -mob (xi_{i+1} - xi_i)/h``.

    Density ``v = exp(u)`` if ``logvar`` else ``u``.  Potential
    ``xi = x^2/2 + c0 u - theta (a2 D2u + a1 (D1u)^2)`` with centered
    differences.  Mobility is the arithmetic mean ``(v_i + v_{i+1})/2`` or,
    with ``upwind``, the density of the node the face velocity comes from.
    End nodes use a quadratic-extrapolation ghost (``quadratic_ghost``) or a
    reflection.  ``ab`` has shape ``(5, n)``.
    """
    n = u.shape[0]
    idx, c1, c2 = _stencils(n, h, quadratic_ghost)
    un = u[idx]
    D1 = np.sum(c1 * un, axis=1)
    D2 = np.sum(c2 * un, axis=1)
    xi = 0.5 * x * x + c0 * u - theta * (a2 * D2 + a1 * D1 * D1)
    dxi = -theta * (a2 * c2 + 2.0 * a1 * D1[:, None] * c1)   # dxi_i / du_idx[i, k]
    dxi[np.arange(n), np.argmax(idx == np.arange(n)[:, None], axis=1)] += c0
    if logvar:
        v = np.exp(u)
        dv = v
    else:
        v = u
        dv = np.ones(n)
    dxi_face = (xi[1:] - xi[:-1]) / h
    if upwind:
        fwd = dxi_face <= 0
        mob = np.where(fwd, v[:-1], v[1:])
        dmob_l = np.where(fwd, dv[:-1], 0.0)
        dmob_r = np.where(fwd, 0.0, dv[1:])
    else:
        mob = 0.5 * (v[:-1] + v[1:])
        dmob_l = 0.5 * dv[:-1]
        dmob_r = 0.5 * dv[1:]
    F = -mob * dxi_face

    R[:] = cv * (v - v_old) / dt
    R[:-1] += F
    R[1:] -= F

    ab[:] = 0.0
    ab[2, :] = cv * dv / dt
    f = np.arange(n - 1)
    # entries of dF_f/du_j: (column, value), mobility then potential part
    cols = [f, f + 1]
    vals = [-dmob_l * dxi_face, -dmob_r * dxi_face]
    for k in range(3):
        cols.append(idx[1:, k])
        vals.append(-mob / h * dxi[1:, k])
        cols.append(idx[:-1, k])
        vals.append(mob / h * dxi[:-1, k])
    flat = ab.reshape(-1)
    for col, val in zip(cols, vals):
        # row f gets +dF_f, row f+1 gets -dF_f
        np.add.at(flat, (2 + f - col) * n + col, val)
        np.add.at(flat, (3 + f - col) * n + col, -val)
    return None
