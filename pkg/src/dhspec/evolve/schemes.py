"""Implicit time steps for the confined porous-medium and fourth-order flows.

Schemes (all conservative, implicit Euler, Newton with banded solves):

* porous medium, ``m > 1``: unknown ``v``, upwinded mobility; the sampled
  profile is an exact discrete steady state and supports can move.
* ``m = 1``, both flows: unknown ``y = log v``, which keeps ``v > 0``;
  arithmetic-mean mobility.  The potentials are exact on quadratics, so the
  sampled Gaussian is an exact discrete steady state.
* thin film, ``m = 3/2``: unknown ``v``, upwinded mobility, so dry nodes
  ahead of the contact line never feed flux into the wet side; the sampled
  profile is an exact discrete steady state.  Negative nodal values are
  counted, not corrected.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from ..profiles import derive_constants
from .grid import State1D
from . import _kernels_py

__all__ = ["BACKEND", "NewtonError", "step_pme", "step_fourth", "set_backend", "kernels"]


def _load_compiled():
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


_compiled = None if os.environ.get("DHSPEC_PURE_PYTHON") else _load_compiled()
kernels = _compiled or _kernels_py
BACKEND = "compiled" if _compiled is not None else "python"


def set_backend(name: str) -> str:
    """Switch between ``"compiled"`` and ``"python"`` kernels; returns the active name."""
    global kernels, BACKEND
    if name == "python":
        kernels, BACKEND = _kernels_py, "python"
    elif name == "compiled":
        mod = _load_compiled()
        if mod is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .` with Cython available")
        kernels, BACKEND = mod, "compiled"
    else:
        raise ValueError(f"unknown backend {name!r}")
    return BACKEND


class NewtonError(RuntimeError):
    """Newton iteration failed even after time-step reduction."""


@dataclass(frozen=True)
class _Problem:
    kind: str          # "upwind" or "potential"
    logvar: bool
    bands: int
    m: float = 1.0
    c0: float = 0.0
    theta: float = 0.0
    a2: float = 0.0
    a1: float = 0.0
    quadratic_ghost: bool = True
    upwind: bool = False


def _assemble(p: _Problem, u, v_old, grid, dt, R, ab):
    x, cv, h = grid.x, grid.cv, grid.h
    if p.kind == "upwind":
        kernels.assemble_upwind(u, v_old, x, cv, h, dt, p.m, 1e-12, R, ab)
    else:
        kernels.assemble_potential(u, v_old, x, cv, h, dt, p.c0, p.theta, p.a2, p.a1,
                                   p.logvar, p.quadratic_ghost, p.upwind, R, ab)


def _newton(p: _Problem, u0, v_old, grid, dt, tol=1e-12, max_iter=30):
    n = grid.n
    u = u0.copy()
    R = np.empty(n)
    ab = np.empty((2 * p.bands + 1, n))
    scale_ref = max(1.0, float(np.max(np.abs(u0)))) if p.logvar else max(float(np.max(np.abs(v_old))), 1e-300)
    for _ in range(max_iter):
        _assemble(p, u, v_old, grid, dt, R, ab)
        # row scaling to density units (and relative units for log variables)
        rs = 1.0 / grid.cv
        if p.logvar:
            rs = rs / np.exp(u)
        rows = np.arange(n)
        for k in range(ab.shape[0]):
            cols = rows
            r_idx = cols + k - p.bands
            ok = (r_idx >= 0) & (r_idx < n)
            ab[k, ok] *= rs[r_idx[ok]]
        delta = solve_banded((p.bands, p.bands), ab, -R * rs, check_finite=False)
        if not np.all(np.isfinite(delta)):
            return None
        u += delta
        if np.max(np.abs(delta)) <= tol * scale_ref:
            return u
    return None


def _advance(p: _Problem, state: State1D, dt: float, to_unknown, to_density, min_dt: float) -> State1D:
    grid = state.grid
    v = state.values
    remaining, t = dt, state.time
    sub = dt
    while remaining > 0:
        sub = min(sub, remaining)
        u = _newton(p, to_unknown(v), v, grid, sub)
        if u is None:
            sub *= 0.5
            if sub < min_dt:
                raise NewtonError(f"Newton failed to converge at t={t:.6g} with dt={sub * 2:.3g}")
            continue
        v = to_density(u)
        remaining -= sub
        t += sub
        if remaining < 1e-15 * dt:
            remaining = 0.0
    return state.with_values(v, state.time + dt)


def _log_maps():
    return (lambda v: np.log(np.maximum(v, 1e-300)), np.exp)


def _id_maps():
    return (lambda v: v.copy(), lambda u: u)


def step_pme(state: State1D, dt: float, m, min_dt: float = 1e-9) -> State1D:
    """One implicit step of ``v_t = (x v)_x + (v^m)_xx`` on ``[-L, L]``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    mf = float(m)
    if mf < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    if mf == 1:
        p = _Problem("potential", True, 2, c0=1.0)
        return _advance(p, state, dt, *_log_maps(), min_dt)
    p = _Problem("upwind", False, 1, m=mf)
    return _advance(p, state, dt, *_id_maps(), min_dt)


def step_fourth(state: State1D, dt: float, m, theta=None, min_dt: float = 1e-9,
                floor: float = 1e-14, max_violation_fraction: float = 0.05,
                upwind: bool = True) -> State1D:
    """One implicit step of the confined fourth-order flow.

    ``v_t = (x v)_x - theta (v (v^(m-3/2) (v^(m-1/2))_xx)_x)_x`` for
    ``m = 1`` (log variable) or ``m = 3/2`` (thin film).  ``theta`` defaults
    to the value tied to ``(m, N=1)``.  Nodes below ``-floor`` are counted in
    ``State1D.violations``; exceeding ``max_violation_fraction`` of the grid
    raises.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    mf = float(m)
    if theta is None:
        theta = float(derive_constants(m, 1).theta)
    theta = float(theta)
    if mf == 1:
        # v^(-1/2) (v^(1/2))'' = y''/2 + (y')^2/4 with y = log v
        p = _Problem("potential", True, 2, theta=theta, a2=0.5, a1=0.25, quadratic_ghost=True)
        return _advance(p, state, dt, *_log_maps(), min_dt)
    if mf == 1.5:
        p = _Problem("potential", False, 2, theta=theta, a2=1.0, a1=0.0, quadratic_ghost=False,
                     upwind=upwind)
        out = _advance(p, state, dt, *_id_maps(), min_dt)
        bad = int(np.count_nonzero(out.values < -floor))
        if bad > max_violation_fraction * state.grid.n:
            raise NewtonError(f"positivity floor violated at {bad} of {state.grid.n} nodes")
        return out.with_values(out.values, out.time, violations=max(state.violations, bad))
    raise ValueError("fourth-order stepping supports m = 1 and m = 3/2")
