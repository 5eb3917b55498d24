"""Entropy, Fisher information and the entropy-information relation.

Test densities are push-forwards of ``v_*`` under ``T = id + s grad psi``,
optionally reweighted by a positive multiplier ``q``:

    v(T x) J(x) = v_*(x) q(x),        J = det DT.

Every integral over ``y = T x`` is pulled back to ``x``, where a quadrature
rule for ``f v_*`` is available, so no density is ever sampled on a grid and
the Jacobian is exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .exactpoly import MultiPoly, apply_HE
from .profiles import barenblatt, barenblatt_log_gradient, derive_constants
from .weighted import QuadratureRule, build_rule, exact_m, integrate, trapezoid_rule

__all__ = [
    "TestDensity",
    "Pullback",
    "polynomial_multiplier",
    "exponential_mixture",
    "entropy_E",
    "fisher_I",
    "gradE_gnorm",
    "relation_terms",
    "relation_residual",
    "test_family",
    "FAMILIES",
    "default_rule",
    "hessian_spot_check",
]

# multiplier: x (n, N) -> (q (n,), grad q (n, N))
Multiplier = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Pullback:
    """A test density seen from the reference nodes ``x_i``.

    ``y`` are the image points, ``omega`` weights with ``int f dy ~ sum omega f(y)``,
    ``v`` the density at ``y`` and ``dlog`` its log-gradient there.
    """

    y: np.ndarray
    omega: np.ndarray
    v: np.ndarray
    dlog: np.ndarray


@dataclass(frozen=True)
class TestDensity:
    """``v = (id + s grad psi)_# (q v_*)``.

    Parameters
    ----------
    N : int
        Space dimension.
    potential : MultiPoly or None
        Generating potential ``psi``; ``None`` means the identity map.
    s : float
        Step along the map.
    multiplier : callable or None
        Positive weight ``q`` and its gradient; ``None`` means ``q = 1``.
    support : str
        ``"full"`` (positive on R^N) or ``"unit-ball-compatible"``.
    """

    name: str
    N: int
    potential: Optional[MultiPoly] = None
    s: float = 0.0
    multiplier: Optional[Multiplier] = field(default=None, compare=False)
    support: str = "full"
    smoothness: str = "analytic"

    def pullback(self, rule: QuadratureRule) -> Pullback:
        x = rule.nodes
        n, N = x.shape
        if N != self.N:
            raise ValueError(f"rule dimension {N} does not match density dimension {self.N}")
        r = np.sqrt(np.sum(x * x, axis=-1))
        vstar = barenblatt(r, rule.m)
        dlog = barenblatt_log_gradient(x, rule.m)
        q = np.ones(n)
        if self.multiplier is not None:
            q, dq = self.multiplier(x)
            if np.any(q <= 0):
                raise ValueError(f"multiplier of {self.name} is not positive on the rule nodes")
            dlog = dlog + dq / q[:, None]
        if self.potential is None or self.s == 0.0:
            return Pullback(y=x, omega=rule.weights / vstar, v=vstar * q, dlog=dlog)
        psi, s = self.potential, self.s
        y = x + s * psi.evaluate_gradient(x)
        DT = np.broadcast_to(np.eye(N), (n, N, N)).copy()
        third = np.zeros((n, N, N, N))
        for i in range(N):
            pi = psi.diff(i)
            for j in range(i, N):
                pij = pi.diff(j)
                DT[:, i, j] += s * pij.evaluate(x)
                DT[:, j, i] = DT[:, i, j]
                for k in range(N):
                    val = pij.diff(k).evaluate(x)
                    third[:, k, i, j] = third[:, k, j, i] = val
        J = np.linalg.det(DT)
        if np.any(J <= 0):
            raise ValueError(f"map of {self.name} is not orientation preserving on the rule nodes")
        inv = np.linalg.inv(DT)
        dlogJ = s * np.einsum("nij,nkij->nk", inv, third)
        grad = np.einsum("nij,nj->ni", inv, dlog - dlogJ)
        return Pullback(y=y, omega=rule.weights * J / vstar, v=vstar * q / J, dlog=grad)

    def mass(self, rule: QuadratureRule) -> float:
        pb = self.pullback(rule)
        return float(np.sum(pb.omega * pb.v))


def polynomial_multiplier(P: MultiPoly, eps: float, center: float = 0.0) -> Multiplier:
    """``q = 1 + eps (P - center)``; pass the ``v_*``-mean as ``center`` to keep the mass."""

    def q(x):
        return 1.0 + eps * (P.evaluate(x) - center), eps * P.evaluate_gradient(x)

    return q


def exponential_mixture(amplitudes: Sequence[float], centers: Sequence[Sequence[float]]) -> Multiplier:
    """``q = sum a_i exp(c_i . x - |c_i|^2/2) / sum a_i``.

    Against the Gaussian ``v_*`` each term is a unit-mass shift, so ``q v_*``
    is a Gaussian mixture with the mass of ``v_*``.
    """
    a = np.asarray(amplitudes, dtype=float)
    c = np.atleast_2d(np.asarray(centers, dtype=float))
    a = a / a.sum()

    def q(x):
        ex = np.exp(x @ c.T - 0.5 * np.sum(c * c, axis=-1)) * a
        return ex.sum(axis=-1), ex @ c

    return q


def _ev(v, m: float):
    if m == 1:
        return v * np.log(v)
    return v**m / (m - 1)


def _check_finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise ValueError(f"{what} diverged")
    return value


def entropy_E(v: TestDensity, m, rule: QuadratureRule) -> float:
    """``int e(v) + |x|^2 v / 2``."""
    pb = v.pullback(rule)
    y2 = np.sum(pb.y**2, axis=-1)
    return _check_finite(float(np.sum(pb.omega * (_ev(pb.v, float(m)) + 0.5 * y2 * pb.v))), "entropy")


def fisher_I(v: TestDensity, m, N: int, rule: QuadratureRule) -> float:
    """``theta/(2m-1) int |grad v^(m-1/2)|^2 + int |x|^2 v / 2``."""
    mf = float(m)
    theta = float(derive_constants(m, N).theta)
    pb = v.pullback(rule)
    y2 = np.sum(pb.y**2, axis=-1)
    g2 = np.sum(pb.dlog**2, axis=-1)
    dirichlet = (mf - 0.5) ** 2 * pb.v ** (2 * mf - 1) * g2
    val = np.sum(pb.omega * (theta / (2 * mf - 1) * dirichlet + 0.5 * y2 * pb.v))
    return _check_finite(float(val), "Fisher information")


def gradE_gnorm(v: TestDensity, m, rule: QuadratureRule) -> float:
    """``int v |grad(e'(v) + |x|^2/2)|^2``."""
    mf = float(m)
    pb = v.pullback(rule)
    flux = mf * pb.v[:, None] ** (mf - 1) * pb.dlog + pb.y
    return _check_finite(float(np.sum(pb.omega * pb.v * np.sum(flux**2, axis=-1))), "metric norm")


def relation_terms(v: TestDensity, m, N: int, rule: QuadratureRule) -> dict:
    """Both sides of the entropy-information relation and their constituents."""
    mf = float(m)
    a = N * (mf - 1)
    I = fisher_I(v, m, N, rule)
    g = gradE_gnorm(v, m, rule)
    E = entropy_E(v, m, rule)
    rhs = N * v.mass(rule) if mf == 1 else a * E
    lhs = (a + 1) * I - 0.5 * g
    return {"E": E, "I": I, "gnorm": g, "lhs": lhs, "rhs": rhs,
            "residual": abs(lhs - rhs) / (1 + abs(rhs))}


def relation_residual(v: TestDensity, m, N: int, rule: QuadratureRule) -> float:
    """``|(a+1) I - g/2 - RHS| / (1 + |RHS|)`` with ``RHS = N M`` (m=1) or ``a E``."""
    return relation_terms(v, m, N, rule)["residual"]


def default_rule(m, N: int) -> QuadratureRule:
    """Rule used for relation tests: Gauss for ``m > 1``, trapezoid for ``m = 1``."""
    if float(m) == 1:
        return trapezoid_rule(N, half_width=12.0, n=241 if N == 1 else 161)
    return build_rule(m, N, radial_order=48, angular_order=24 if N > 1 else 1)


# ---- test families -------------------------------------------------------

FAMILIES = ("translation", "dilation", "pushforward", "multiplier", "mixture", "all")


def _var(i, N):
    return MultiPoly.variable(i, N)


def _vstar_mean(P: MultiPoly, rule: QuadratureRule) -> float:
    return integrate(rule, P.evaluate(rule.nodes)) / integrate(rule, np.ones(len(rule)))


def _random_poly(rng, N: int, degree: int) -> MultiPoly:
    from itertools import product

    terms = {}
    for alpha in product(range(degree + 1), repeat=N):
        if 2 <= sum(alpha) <= degree:
            terms[alpha] = Fraction(int(rng.integers(-8, 9)), 8)
    p = MultiPoly(N, terms)
    return p if not p.is_zero() else _var(0, N) ** 2


def _deformation_size(psi: MultiPoly, N: int, rule: QuadratureRule) -> float:
    if psi.degree <= 1:
        return float(np.max(np.linalg.norm(psi.evaluate_gradient(rule.nodes), axis=-1)))
    H = np.zeros((len(rule), N, N))
    for i in range(N):
        for j in range(N):
            H[:, i, j] = psi.diff(i).diff(j).evaluate(rule.nodes)
    return float(np.max(np.abs(np.linalg.eigvalsh(H))))


def _safe_step(psi: MultiPoly, N: int, rule: QuadratureRule, target: float) -> float:
    """Largest ``s <= target`` keeping the eigenvalues of ``I + s Hess psi`` above 1/2."""
    H = np.zeros((len(rule), N, N))
    for i in range(N):
        for j in range(N):
            H[:, i, j] = psi.diff(i).diff(j).evaluate(rule.nodes) if psi.degree >= 2 else 0.0
    ev = np.linalg.eigvalsh(H)
    spread = max(abs(ev.min()), abs(ev.max()), 1e-12)
    return min(target, 0.5 / spread)


def _positive_poly_multiplier(P: MultiPoly, rule: QuadratureRule, eps: float, name: str, N: int):
    center = _vstar_mean(P, rule)
    vals = P.evaluate(rule.nodes) - center
    low = vals.min()
    if low < 0:
        eps = min(eps, 0.5 / -low)
    return TestDensity(name, N, multiplier=polynomial_multiplier(P, eps, center),
                       support="full" if rule.m == 1 else "unit-ball-compatible")


def test_family(m, N: int, family: str = "all", samples: int = 20, seed: int = 0,
                rule: Optional[QuadratureRule] = None) -> List[TestDensity]:
    """Deterministic list of at least ``samples`` admissible test densities.

    ``m > 1``: translations, dilations, polynomial push-forwards and
    mass-preserving polynomial reweightings of ``v_*``.  ``m = 1``: affine
    push-forwards (polynomial maps of higher degree are not injective on
    R^N), positive polynomial reweightings and Gaussian mixtures.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    mf = float(m)
    rule = rule or default_rule(m, N)
    support = "full" if mf == 1 else "unit-ball-compatible"
    rng = np.random.default_rng(seed)
    r2 = MultiPoly.radius_squared(N)
    x1 = _var(0, N)
    out: List[TestDensity] = [TestDensity("ground-state", N, support=support)]

    def add(kind, d):
        if family in ("all", kind):
            out.append(d)

    # translations
    dirs = [x1] if N == 1 else [x1, _var(1, N), x1 + _var(1, N)]
    for s in (0.05, 0.1, 0.2, -0.15):
        for k, psi in enumerate(dirs):
            add("translation", TestDensity(f"translate[{k}] s={s}", N, psi, s, support=support))
    # dilations and anisotropic stretches
    dil = r2 / 2
    for s in (-0.1, 0.05, 0.2, 0.4):
        add("dilation", TestDensity(f"dilate s={s}", N, dil, s, support=support))
    if N > 1:
        for s in (0.1, -0.2):
            add("dilation", TestDensity(f"stretch s={s}", N, x1 * x1 / 2, s, support=support))
            add("dilation", TestDensity(f"shear s={s}", N, x1 * _var(1, N), s, support=support))
    # nonlinear push-forwards: only on the compact support
    if mf > 1:
        fixed = [x1**3 / 6, r2 * r2 / 4, x1**4 / 12 + x1 * x1 / 2]
        if N > 1:
            fixed += [x1 * x1 * _var(1, N), x1**3 / 6 - x1 * _var(1, N) ** 2 / 2]
        for k, psi in enumerate(fixed):
            add("pushforward", TestDensity(f"poly-map[{k}]", N, psi, _safe_step(psi, N, rule, 0.2), support=support))
    # reweightings
    mults = [(x1 * x1, 0.3), (x1**4, 0.2), (r2 * r2 + x1 * x1 * x1, 0.1)]
    if mf > 1:
        mults += [(x1, 0.4), (x1**3 - x1, 0.3)]
    for k, (P, eps) in enumerate(mults):
        add("multiplier", _positive_poly_multiplier(P, rule, eps, f"reweight[{k}]", N))
    # combined map and reweighting
    comb = TestDensity("translate+reweight", N, x1, 0.1,
                       multiplier=_positive_poly_multiplier(x1 * x1, rule, 0.2, "", N).multiplier,
                       support=support)
    add("multiplier", comb)
    if mf == 1:
        e = np.eye(N)
        mixes = [([1, 1], [0.8 * e[0], -0.8 * e[0]]), ([2, 1], [0.5 * e[0], -1.0 * e[0]]),
                 ([1, 1, 1], [e[0], -e[0], 0 * e[0]]), ([1], [0.3 * e[0]])]
        if N > 1:
            mixes += [([1, 1], [e[0], e[1]]), ([1, 2, 1], [e[0] + e[1], 0 * e[0], -e[1]])]
        for k, (amp, cen) in enumerate(mixes):
            add("mixture", TestDensity(f"mixture[{k}]", N, multiplier=exponential_mixture(amp, cen)))
        add("mixture", TestDensity("dilated mixture", N, dil, 0.1,
                                   multiplier=exponential_mixture([1, 1], [0.7 * e[0], -0.7 * e[0]])))
    # seeded random members until the requested count is reached
    k = 0
    while len(out) < samples:
        P = _random_poly(rng, N, 4 if mf > 1 else 2)
        choice = family if family != "all" else ("pushforward", "multiplier", "mixture")[k % 3]
        if choice == "mixture" and mf == 1:
            nmix = int(rng.integers(1, 4))
            d = TestDensity(f"random mixture[{k}]", N, multiplier=exponential_mixture(
                rng.uniform(0.5, 2.0, nmix), rng.uniform(-1, 1, (nmix, N))))
        elif choice in ("multiplier", "mixture"):
            Q = P * P if mf == 1 else P
            d = _positive_poly_multiplier(Q, rule, 0.2, f"random reweight[{k}]", N)
        elif choice == "translation":
            c = rng.uniform(-0.3, 0.3, N)
            psi = _exact_linear(c, N)
            d = TestDensity(f"random translate[{k}]", N, psi, 1.0, support=support)
        elif choice == "dilation":
            d = TestDensity(f"random dilate[{k}]", N, dil, float(rng.uniform(-0.2, 0.4)), support=support)
        else:
            if mf == 1:
                P = _quadratic_part(P)
            d = TestDensity(f"random map[{k}]", N, P, _safe_step(P, N, rule, 0.3), support=support)
        out.append(d)
        k += 1
    return out


def _exact_linear(c, N: int) -> MultiPoly:
    return MultiPoly(N, {tuple(int(i == j) for j in range(N)): Fraction(float(ci)).limit_denominator(10**6)
                         for i, ci in enumerate(c)})


def _quadratic_part(P: MultiPoly) -> MultiPoly:
    return MultiPoly(P.dim, {a: c for a, c in P.terms.items() if sum(a) <= 2})


# ---- second-order check ---------------------------------------------------

def hessian_spot_check(psi: MultiPoly, m, N: int, rule: Optional[QuadratureRule] = None,
                       step: float = 1e-2, normalize: bool = True) -> dict:
    """Second differences of the relation's terms along ``s -> (id + s grad psi)_# v_*``.

    Compares ``d^2/ds^2 [(a+1) I]``, ``d^2/ds^2 [g/2]`` and ``d^2/ds^2 [a E]``
    at ``s = 0`` with the quadratic forms built from ``H_E psi``:
    ``int v_* |grad H_E psi|^2 + a int v_* grad psi . grad H_E psi``,
    ``int v_* |grad H_E psi|^2`` and ``a int v_* grad psi . grad H_E psi``.

    With ``normalize`` the potential is first scaled so that the largest
    Hessian eigenvalue (gradient norm, for affine ``psi``) over the rule nodes
    is 1; ``step`` is then the size of the map's deformation.
    """
    mf = float(m)
    a = N * (mf - 1)
    rule = rule or build_rule(m, N, 48, 24 if N > 1 else 1)
    if normalize:
        psi = psi / Fraction(_deformation_size(psi, N, rule)).limit_denominator(10**12)
    HEpsi = apply_HE(psi, exact_m(m), N)
    g = psi.evaluate_gradient(rule.nodes)
    gh = HEpsi.evaluate_gradient(rule.nodes)
    hess_E = integrate(rule, np.sum(g * gh, axis=-1))
    hess_g = integrate(rule, np.sum(gh * gh, axis=-1))

    def second(fun):
        vals = [fun(TestDensity("curve", N, psi, s)) for s in (-step, 0.0, step)]
        return (vals[0] - 2 * vals[1] + vals[2]) / step**2

    d2I = second(lambda d: (a + 1) * fisher_I(d, m, N, rule))
    d2g = second(lambda d: 0.5 * gradE_gnorm(d, m, rule))
    d2E = second(lambda d: entropy_E(d, m, rule))
    out = {
        "fisher": (d2I, hess_g + a * hess_E),
        "gnorm": (d2g, hess_g),
    }
    if mf > 1:
        out["entropy"] = (a * d2E, a * hess_E)
    else:
        out["entropy"] = (d2E, hess_E)
    return {k: {"finite_difference": fd, "quadratic_form": qf,
                "relative_error": abs(fd - qf) / max(abs(qf), 1e-300)} for k, (fd, qf) in out.items()}
