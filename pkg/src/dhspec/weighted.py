"""Quadrature against the Barenblatt weight and the Hilbert space ``H``.

A :class:`QuadratureRule` integrates ``f(x) v_*(x) dx``: the profile is
folded into the weights.  Rules are radial x angular products.  The radial
part uses ``t = r^2`` (``m > 1``, Gauss-Jacobi for ``(1-t)^(1/(m-1))
t^(N/2-1)``) or ``t = r^2/2`` (``m = 1``, generalized Gauss-Laguerre).  The
angular rules are antipodally symmetric, so odd-degree parts of a polynomial
cancel exactly and a rule with ``radial_order = n`` and ``angular_order = a``
integrates polynomials of degree ``<= min(4n - 2, 2a + 1)`` exactly against
``v_*``.

``H`` is the space of functions modulo constants with
``||psi||_H^2 = int v_* |grad psi|^2 dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence

import numpy as np
from scipy import special

from .exactpoly import MultiPoly, apply_HE, apply_HI, as_rational
from .profiles import barenblatt, barenblatt_log_gradient

__all__ = [
    "QuadratureRule",
    "build_rule",
    "trapezoid_rule",
    "exact_m",
    "integrate",
    "h_inner",
    "gram",
    "boundary_flux",
    "poincare_ratio",
    "apply_operator",
    "divergence_form_HE",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes of shape ``(n, N)`` and positive weights for ``int f v_* dx``."""

    nodes: np.ndarray
    weights: np.ndarray
    m: float
    N: int
    exact_degree: int  # -1 when the rule is not a Gauss product rule

    def __len__(self):
        return len(self.weights)

    def matches(self, m, N: int) -> bool:
        return self.N == N and math.isclose(self.m, float(m), rel_tol=0, abs_tol=1e-15)


def exact_m(m) -> Fraction:
    """Exact rational for the symbolic operators; floats go through their repr."""
    if isinstance(m, float):
        return Fraction(repr(m))
    return as_rational(m)


def _angular(N: int, order: int):
    if N == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    nphi = 2 * order + 2
    phi = 2 * np.pi * np.arange(nphi) / nphi
    if N == 2:
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        return pts, np.full(nphi, 2 * np.pi / nphi)
    ct, wt = special.roots_legendre(order + 1)
    st = np.sqrt(1.0 - ct**2)
    pts = np.stack([
        (st[:, None] * np.cos(phi)[None, :]).ravel(),
        (st[:, None] * np.sin(phi)[None, :]).ravel(),
        np.repeat(ct, nphi),
    ], axis=-1)
    w = (wt[:, None] * np.full(nphi, 2 * np.pi / nphi)[None, :]).ravel()
    return pts, w


def build_rule(m, N: int, radial_order: int, angular_order: int) -> QuadratureRule:
    """Product Gauss rule for ``int f(x) v_*(x) dx`` on the support of ``v_*``."""
    if N > 3:
        raise NotImplementedError("quadrature rules are implemented for N <= 3")
    if radial_order < 1 or angular_order < 1:
        raise ValueError("quadrature orders must be at least 1")
    mf = float(m)
    if mf < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    beta = N / 2 - 1
    if mf == 1:
        t, w = special.roots_genlaguerre(radial_order, beta)
        r = np.sqrt(2 * t)
        wr = math.exp(-0.5) * 2 ** (N / 2 - 1) * w
    else:
        p = 1.0 / (mf - 1)
        c = (mf - 1) / (2 * mf)
        u, w = special.roots_jacobi(radial_order, p, beta)
        r = np.sqrt((u + 1) / 2)
        wr = c**p * 0.5 * w / 2 ** (p + N / 2)
    ang, wa = _angular(N, angular_order)
    nodes = (r[:, None, None] * ang[None, :, :]).reshape(-1, N)
    weights = (wr[:, None] * wa[None, :]).ravel()
    exact = min(4 * radial_order - 2, 2 * angular_order + 1) if N > 1 else 4 * radial_order - 2
    return QuadratureRule(nodes=nodes, weights=weights, m=mf, N=N, exact_degree=exact)


def trapezoid_rule(N: int, half_width: float = 12.0, n: int = 241) -> QuadratureRule:
    """Tensor trapezoid rule on ``[-L, L]^N`` for the Gaussian weight (``m = 1``).

    Spectrally accurate for smooth integrands decaying like ``v_*``; used for
    non-polynomial integrands (mixtures, logarithms) where Gauss rules lose
    accuracy to complex singularities.
    """
    x = np.linspace(-half_width, half_width, n)
    h = x[1] - x[0]
    grids = np.meshgrid(*([x] * N), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    v = barenblatt(np.sqrt(np.sum(nodes**2, axis=-1)), 1)
    return QuadratureRule(nodes=nodes, weights=v * h**N, m=1.0, N=N, exact_degree=-1)


def integrate(rule: QuadratureRule, values) -> float:
    """``sum_i w_i f(x_i)``; numpy's pairwise summation fixes the order."""
    return float(np.sum(rule.weights * np.asarray(values)))


def _check_rule(rule: QuadratureRule, m, N: int):
    if not rule.matches(m, N):
        raise ValueError(f"rule built for (m={rule.m}, N={rule.N}) used with (m={m}, N={N})")


def h_inner(psi: MultiPoly, phi: MultiPoly, rule: QuadratureRule, m, N: int) -> float:
    """``int v_* grad psi . grad phi dx``."""
    _check_rule(rule, m, N)
    gp = psi.evaluate_gradient(rule.nodes)
    gq = gp if phi is psi else phi.evaluate_gradient(rule.nodes)
    return integrate(rule, np.sum(gp * gq, axis=-1))


def apply_operator(p: MultiPoly, m, N: int, operator: str) -> MultiPoly:
    if operator == "none":
        return p
    if operator == "HE":
        return apply_HE(p, exact_m(m), N)
    if operator == "HI":
        return apply_HI(p, exact_m(m), N)
    if operator == "HE2":
        me = exact_m(m)
        return apply_HE(apply_HE(p, me, N), me, N)
    raise ValueError(f"unknown operator {operator!r}")


def gram(basis: Sequence[MultiPoly], rule: QuadratureRule, m, N: int, operator: str = "none") -> np.ndarray:
    """Matrix ``G[i, j] = <psi_i, Op psi_j>_H`` with Op in {none, HE, HI, HE2}."""
    if not basis:
        raise ValueError("basis must be nonempty")
    _check_rule(rule, m, N)
    grads = [b.evaluate_gradient(rule.nodes) for b in basis]
    if operator == "none":
        images = grads
    else:
        images = [apply_operator(b, m, N, operator).evaluate_gradient(rule.nodes) for b in basis]
    n = len(basis)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = integrate(rule, np.sum(grads[i] * images[j], axis=-1))
    return G


def boundary_flux(psi: MultiPoly, m, N: int, exponents: Iterable[int] = range(1, 9), angular_order: int = 8) -> np.ndarray:
    """``max_omega |v_*(r) d_r psi(r omega)|`` at ``r = 1 - 10^-k``.

    Returns one value per exponent ``k``; the sequence must tend to zero.
    """
    if float(m) == 1:
        raise ValueError("the boundary flux is only defined for m > 1 (compact support)")
    ang, _ = _angular(N, angular_order)
    out = []
    for k in exponents:
        r = 1.0 - 10.0 ** (-k)
        pts = r * ang
        dr = np.sum(psi.evaluate_gradient(pts) * ang, axis=-1)
        out.append(float(np.max(np.abs(barenblatt(r, m) * dr))))
    return np.array(out)


def poincare_ratio(psi: MultiPoly, rule: QuadratureRule, m, N: int) -> float:
    """``inf_c int (1+|x|^2) v_* (psi - c)^2 / int v_* |grad psi|^2``."""
    _check_rule(rule, m, N)
    if psi.is_constant():
        raise ValueError("psi is constant; the H-norm vanishes")
    wt = 1.0 + np.sum(rule.nodes**2, axis=-1)
    vals = psi.evaluate(rule.nodes)
    c = integrate(rule, wt * vals) / integrate(rule, wt)
    lhs = integrate(rule, wt * (vals - c) ** 2)
    return lhs / h_inner(psi, psi, rule, m, N)


def divergence_form_HE(psi: MultiPoly, points, m) -> np.ndarray:
    """``-m v_*^(m-2) div(v_* grad psi)`` evaluated pointwise.

    Uses the product rule ``div(v grad psi) = v (Lap psi + grad log v . grad psi)``
    with the profile's own log-gradient; no use of the simplified operator.
    """
    mf = float(m)
    pts = np.asarray(points, dtype=float)
    if psi.dim == 1 and pts.ndim == 1:
        pts = pts[:, None]
    r = np.sqrt(np.sum(pts**2, axis=-1))
    v = barenblatt(r, mf)
    grad = psi.evaluate_gradient(pts)
    lap = sum(psi.diff(i).diff(i) for i in range(psi.dim))
    lap = lap.evaluate(pts) if isinstance(lap, MultiPoly) else np.zeros(len(pts))
    dlog = barenblatt_log_gradient(pts, mf)
    div = v * (lap + np.sum(dlog * grad, axis=-1))
    return -mf * v ** (mf - 2) * div
