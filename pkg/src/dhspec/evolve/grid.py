"""Grids, states, initial perturbations and diagnostics for the 1D harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from ..exactpoly import MultiPoly
from ..profiles import barenblatt

__all__ = [
    "Grid1D",
    "State1D",
    "make_grid",
    "stationary_state",
    "pushforward_perturb",
    "moment",
    "wasserstein_1d",
    "fit_decay_rate",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform nodes on ``[-L, L]``; ``n`` nodes, zero-flux ends."""

    L: float
    n: int
    boundary: str = "zero-flux"

    def __post_init__(self):
        if self.n < 5:
            raise ValueError("grid needs at least 5 nodes")
        if self.L <= 0:
            raise ValueError("L must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n)

    @property
    def cv(self) -> np.ndarray:
        """Control volumes; their sum with ``v`` is the trapezoid rule."""
        c = np.full(self.n, self.h)
        c[0] = c[-1] = 0.5 * self.h
        return c


def make_grid(m, n: int, L: Optional[float] = None) -> Grid1D:
    """Grid with the default width: 1.5 for compact profiles, 8 for Gaussians."""
    if L is None:
        L = 8.0 if float(m) == 1 else 1.5
    if float(m) > 1 and L < 1.5:
        raise ValueError("L must be at least 1.5 when m > 1")
    return Grid1D(L=float(L), n=int(n))


@dataclass(frozen=True)
class State1D:
    """Nodal density values at a time; ``violations`` counts negative nodes."""

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0
    violations: int = 0

    @property
    def mass(self) -> float:
        return moment(self, 0)

    def with_values(self, values, time, violations=None) -> "State1D":
        return replace(self, values=values, time=time,
                       violations=self.violations if violations is None else violations)


def stationary_state(m, grid: Grid1D) -> State1D:
    return State1D(grid, barenblatt(np.abs(grid.x), m))


def moment(state: State1D, order: int) -> float:
    """Trapezoid value of ``int x^order v dx``."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    g = state.grid
    return float(np.sum(g.cv * g.x**order * state.values))


def _invert_monotone(T, y, lo: float, hi: float, iters: int = 200) -> np.ndarray:
    a = np.full_like(y, lo)
    b = np.full_like(y, hi)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        below = T(mid) < y
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
        if np.all(b - a <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(a))):
            break
    return 0.5 * (a + b)


def pushforward_perturb(psi: MultiPoly, s: float, m, grid: Grid1D, N: int = 1) -> State1D:
    """Sample ``(id + s psi')_# v_*`` on the grid.

    ``v_s(x + s psi'(x)) (1 + s psi''(x)) = v_*(x)``.  The sampled density is
    rescaled so its trapezoid mass equals that of the sampled ``v_*``, which
    makes the discrete masses of the perturbed and stationary states agree
    exactly.
    """
    if N != 1 or psi.dim != 1:
        raise ValueError("the PDE harness is one-dimensional")
    mf = float(m)
    x = grid.x
    ref = stationary_state(m, grid)
    if s == 0.0:
        return ref
    d1, d2 = psi.diff(0), psi.diff(0).diff(0)
    T = lambda z: z + s * d1.evaluate(z[:, None] if z.ndim == 1 else z)
    dT = lambda z: 1.0 + s * d2.evaluate(z[:, None])
    # preimages must lie where the map is monotone
    lo, hi = (-1.0, 1.0) if mf > 1 else (-grid.L - 2.0, grid.L + 2.0)
    probe = np.linspace(lo, hi, 4001)
    if np.any(dT(probe) <= 0):
        raise ValueError("map id + s psi' is not injective (1 + s psi'' <= 0 somewhere)")
    Tlo, Thi = T(np.array([lo]))[0], T(np.array([hi]))[0]
    if mf == 1 and (Tlo > x[0] or Thi < x[-1]):
        raise ValueError("map does not cover the grid; widen the monotone range or reduce s")
    inside = (x > Tlo) & (x < Thi)
    pre = _invert_monotone(lambda z: T(z), x[inside], lo, hi)
    vals = np.zeros_like(x)
    vals[inside] = barenblatt(np.abs(pre), m) / dT(pre)
    vals *= ref.mass / float(np.sum(grid.cv * vals))
    return State1D(grid, vals)


def _quantile_segments(values: np.ndarray, grid: Grid1D, mass: float):
    """Cells with positive mass as (s0, s1, x0, x1, slope), cumulated from the left."""
    v = np.clip(values, 0.0, None)
    cell = 0.5 * grid.h * (v[:-1] + v[1:])
    cell *= mass / cell.sum()
    # cells below 1e-250 M carry no measurable transport cost
    keep = cell > 1e-250 * mass
    x = grid.x
    s1 = np.cumsum(cell)[keep]
    s0 = s1 - cell[keep]
    return s0, s1, x[:-1][keep], x[1:][keep], grid.h / cell[keep]


def _half_distance(sa, sb, half: float) -> float:
    """``int_0^half (Q_a - Q_b)^2 ds`` for piecewise-linear quantiles."""
    pts = np.union1d(np.concatenate([sa[0], sa[1]]), np.concatenate([sb[0], sb[1]]))
    pts = pts[pts < half]
    pts = np.union1d(pts, [0.0, half])
    a, b = pts[:-1], pts[1:]
    mid = 0.5 * (a + b)

    def q(seg, s_lo, s_hi, where):
        s0, s1, x0, x1, slopes = seg
        k = np.clip(np.searchsorted(s1, where, side="left"), 0, len(s1) - 1)
        slope = slopes[k]
        return x0[k] + slope * (s_lo - s0[k]), x0[k] + slope * (s_hi - s0[k])

    qa0, qa1 = q(sa, a, b, mid)
    qb0, qb1 = q(sb, a, b, mid)
    d0, d1 = qa0 - qb0, qa1 - qb1
    return float(np.sum((b - a) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0))


def wasserstein_1d(v: State1D, w: State1D, rtol: float = 1e-8) -> float:
    """Quadratic Wasserstein distance between two nodal densities.

    The CDF is interpolated linearly between nodes (cell masses from the
    trapezoid rule) and the quantile difference is integrated exactly.  Each
    half of the mass is cumulated from its own tail, so nearby densities keep
    full relative accuracy far out.
    """
    if v.grid != w.grid:
        raise ValueError("states live on different grids")
    mv, mw = v.mass, w.mass
    if abs(mv - mw) > rtol * max(abs(mv), abs(mw)):
        raise ValueError(f"mass mismatch: {mv} vs {mw}")
    M = 0.5 * (mv + mw)
    g = v.grid
    left = _half_distance(_quantile_segments(v.values, g, M), _quantile_segments(w.values, g, M), 0.5 * M)
    flip = Grid1D(g.L, g.n)  # reflection x -> -x maps the grid to itself
    right = _half_distance(_quantile_segments(v.values[::-1], flip, M),
                           _quantile_segments(w.values[::-1], flip, M), 0.5 * M)
    return math.sqrt(max(left + right, 0.0))


def fit_decay_rate(series: Sequence[Tuple[float, float]], window: Tuple[float, float] = (1.0, 4.0)):
    """Least-squares slope of ``log d`` against ``t`` on ``window``.

    Returns ``(rate, r2)`` with ``rate = -slope``.
    """
    t0, t1 = window
    pts = [(t, d) for t, d in series if t0 <= t <= t1]
    if len(pts) < 2:
        raise ValueError(f"fewer than two samples in window {window}")
    t = np.array([p[0] for p in pts], dtype=float)
    d = np.array([p[1] for p in pts], dtype=float)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise ValueError("decay series must be positive on the fit window")
    y = np.log(d)
    slope, icpt = np.polyfit(t, y, 1)
    resid = y - (slope * t + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(-slope) + 0.0, r2
