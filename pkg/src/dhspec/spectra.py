"""Closed-form spectra of the displacement Hessians ``H_E`` and ``H_I``.

Eigenvalues are indexed by ``(l, k)`` with ``l`` the degree of the angular
(solid-harmonic) factor and ``k`` the degree of the radial polynomial in
``|x|^2``::

    lambda_lk = l + 2k + 2k (k + l + N/2 - 1)(m - 1)          (H_E)
    mu_lk     = (lambda^2 + N(m-1) lambda) / (1 + N(m-1))      (H_I)

Eigenfunction bases
-------------------
``N = 1``
    ``Y_0 = 1`` and ``Y_1 = x1``.
``N = 2``
    ``n = 1`` is ``Re (x1 + i x2)^l`` and ``n = 2`` is ``Im (x1 + i x2)^l``.
``N = 3``
    ``n = 1`` is the zonal harmonic, then ``n = 2j, 2j+1`` are the cosine and
    sine harmonics of azimuthal order ``j``.  Each basis polynomial is scaled
    to leading coefficient 1 in descending grlex order.

For ``m > 1`` the radial factor is the terminating Gauss series
``F(-k, 1/(m-1) + l + N/2 - 1 + k; l + N/2; |x|^2)``.  For ``m = 1`` the
radial factor is the confluent limit ``1F1(-k; l + N/2; |x|^2 / 2)``; these
regroup the product Hermite polynomials of total degree ``l + 2k`` into
radial x harmonic form (same eigenvalue, same eigenspace dimension per
degree).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from .exactpoly import MultiPoly, as_rational

__all__ = [
    "EigenIndex",
    "SpectrumEntry",
    "CrossingSet",
    "check_index",
    "lambda_eig",
    "mu_eig",
    "multiplicity",
    "hermite",
    "hermite_1d",
    "pochhammer",
    "hypergeom_poly",
    "confluent_poly",
    "solid_harmonic",
    "eigenfunction",
    "eigen_indices",
    "mu_to_lambda",
    "crossing",
    "spectrum_table",
]


@dataclass(frozen=True, order=True)
class EigenIndex:
    l: int
    n: int
    k: int


@dataclass(frozen=True)
class SpectrumEntry:
    l: int
    k: int
    lam: Fraction
    mu: Fraction
    multiplicity: int

    @property
    def degree(self) -> int:
        return self.l + 2 * self.k

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "k": self.k,
            "lambda": str(self.lam),
            "mu": str(self.mu),
            "multiplicity": self.multiplicity,
            "degree": self.degree,
        }


def check_index(l: int, k: int, N: int) -> None:
    if N < 1:
        raise ValueError(f"dimension must be positive, got N={N}")
    if l < 0 or k < 0:
        raise ValueError(f"indices must be nonnegative, got (l, k)=({l}, {k})")
    if (l, k) == (0, 0):
        raise ValueError("(l, k) = (0, 0) is the constant mode, not an eigenfunction in H")
    if N == 1 and l > 1:
        raise ValueError(f"l must be 0 or 1 when N=1, got l={l}")


def _m_exact(m) -> Fraction:
    m = as_rational(m)
    if m < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    return m


def lambda_eig(l: int, k: int, m, N: int, *, strict: bool = True) -> Fraction:
    """Eigenvalue of ``H_E``.

    ``strict=False`` skips the index validation and evaluates the formula for
    any nonnegative ``(l, k)``; used when comparing eigenvalue branches
    algebraically (e.g. ``l = 3`` curves at ``N = 1``).
    """
    if strict:
        check_index(l, k, N)
    m = _m_exact(m)
    return l + 2 * k + 2 * k * (k + l + Fraction(N, 2) - 1) * (m - 1)


def mu_eig(l: int, k: int, m, N: int, *, strict: bool = True) -> Fraction:
    lam = lambda_eig(l, k, m, N, strict=strict)
    a = N * (_m_exact(m) - 1)
    return (lam * lam + a * lam) / (1 + a)


def multiplicity(l: int, N: int) -> int:
    """Dimension of the space of degree-``l`` spherical harmonics in ``N`` variables."""
    if N < 1 or l < 0:
        raise ValueError(f"invalid (l, N)=({l}, {N})")
    if N == 1:
        if l > 1:
            raise ValueError(f"l must be 0 or 1 when N=1, got l={l}")
        return 1
    if l == 0:
        return 1
    num = math.factorial(N + l - 3) * (N + 2 * l - 2)
    den = math.factorial(l) * math.factorial(N - 2)
    return num // den


# -- polynomial families --------------------------------------------------

def hermite_1d(n: int) -> List[Fraction]:
    """Coefficients (ascending) of ``psi_n`` from ``psi_{n+1} = z psi_n - psi_n'``."""
    c = [Fraction(1)]
    for _ in range(n):
        shifted = [Fraction(0)] + c
        deriv = [j * c[j] for j in range(1, len(c))] + [Fraction(0), Fraction(0)]
        c = [shifted[j] - deriv[j] for j in range(len(shifted))]
    return c


def hermite(alpha: Sequence[int]) -> MultiPoly:
    """Product Hermite polynomial ``psi_alpha(x) = prod_i psi_{alpha_i}(x_i)``."""
    N = len(alpha)
    out = MultiPoly.constant(N, 1)
    for i, a in enumerate(alpha):
        coeffs = hermite_1d(a)
        terms = {}
        for j, c in enumerate(coeffs):
            if c:
                idx = [0] * N
                idx[i] = j
                terms[tuple(idx)] = c
        out = out * MultiPoly(N, terms)
    return out


def pochhammer(s, j: int) -> Fraction:
    out = Fraction(1)
    s = as_rational(s)
    for i in range(j):
        out *= s + i
    return out


def _bad_c(c: Fraction) -> bool:
    return c <= 0 and c.denominator == 1


def hypergeom_poly(k: int, b, c) -> List[Fraction]:
    """Coefficients of ``F(-k, b; c; z)`` in ascending powers of ``z``."""
    b, c = as_rational(b), as_rational(c)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if _bad_c(c):
        raise ValueError(f"c must not be a nonpositive integer, got {c}")
    return [
        pochhammer(-k, j) * pochhammer(b, j) / (pochhammer(c, j) * math.factorial(j))
        for j in range(k + 1)
    ]


def confluent_poly(k: int, c, scale=Fraction(1)) -> List[Fraction]:
    """Coefficients of ``1F1(-k; c; scale*z)`` in ascending powers of ``z``."""
    c, scale = as_rational(c), as_rational(scale)
    if _bad_c(c):
        raise ValueError(f"c must not be a nonpositive integer, got {c}")
    return [
        pochhammer(-k, j) / (pochhammer(c, j) * math.factorial(j)) * scale**j
        for j in range(k + 1)
    ]


def _normalize_leading(p: MultiPoly) -> MultiPoly:
    return p / p.leading_coefficient()


def _re_im_power(l: int, pad: int = 0) -> Tuple[MultiPoly, MultiPoly]:
    """Real and imaginary parts of ``(x1 + i x2)^l`` in ``2 + pad`` variables."""
    dim = 2 + pad
    re, im = {}, {}
    for j in range(l + 1):
        # binom(l, j) x1^(l-j) (i x2)^j
        c = Fraction(math.comb(l, j))
        idx = (l - j, j) + (0,) * pad
        r = j % 4
        if r == 0:
            re[idx] = c
        elif r == 1:
            im[idx] = c
        elif r == 2:
            re[idx] = -c
        else:
            im[idx] = -c
    return MultiPoly(dim, re), MultiPoly(dim, im)


def _zonal_factor(l: int, order: int) -> MultiPoly:
    """``sum_j c_j x3^(l-order-2j) |x|^(2j)`` in three variables.

    Multiplied by ``Re/Im (x1 + i x2)^order`` this gives the solid harmonic
    ``r^l P_l^order(cos theta) cos/sin(order phi)`` up to a constant.
    """
    r2 = MultiPoly.radius_squared(3)
    out = MultiPoly.zero(3)
    for j in range((l - order) // 2 + 1):
        c = Fraction(
            (-1) ** j * math.factorial(2 * l - 2 * j),
            math.factorial(j) * math.factorial(l - j) * math.factorial(l - order - 2 * j),
        )
        out = out + MultiPoly.monomial((0, 0, l - order - 2 * j), c) * r2**j
    return out


def solid_harmonic(l: int, n: int, N: int) -> MultiPoly:
    """Homogeneous harmonic polynomial of degree ``l``; ``n`` is 1-based."""
    count = multiplicity(l, N)
    if not 1 <= n <= count:
        raise ValueError(f"n must lie in 1..{count} for (l, N)=({l}, {N}), got {n}")
    if N > 3:
        raise NotImplementedError("explicit harmonic bases are available for N <= 3 only")
    if N == 1:
        return MultiPoly.monomial((l,), 1)
    if l == 0:
        return MultiPoly.constant(N, 1)
    if N == 2:
        re, im = _re_im_power(l)
        return _normalize_leading(re if n == 1 else im)
    order = n // 2
    zonal = _zonal_factor(l, order)
    if order == 0:
        return _normalize_leading(zonal)
    re, im = _re_im_power(order, pad=1)
    return _normalize_leading(zonal * (re if n % 2 == 0 else im))


def eigenfunction(idx: EigenIndex, m, N: int) -> MultiPoly:
    """Polynomial eigenfunction of ``H_E`` (and ``H_I``) of degree ``l + 2k``."""
    l, n, k = idx.l, idx.n, idx.k
    check_index(l, k, N)
    m = _m_exact(m)
    Y = solid_harmonic(l, n, N)
    c = l + Fraction(N, 2)
    if m == 1:
        coeffs = confluent_poly(k, c, Fraction(1, 2))
    else:
        b = 1 / (m - 1) + l + Fraction(N, 2) - 1 + k
        coeffs = hypergeom_poly(k, b, c)
    r2 = MultiPoly.radius_squared(N)
    radial = MultiPoly.zero(N)
    power = MultiPoly.constant(N, 1)
    for j, cj in enumerate(coeffs):
        if j:
            power = power * r2
        radial = radial + power.scale(cj)
    return radial * Y


def eigen_indices(N: int, max_degree: int) -> List[EigenIndex]:
    """All valid ``(l, n, k)`` with ``l + 2k <= max_degree``."""
    out = []
    lmax = min(max_degree, 1) if N == 1 else max_degree
    for l in range(lmax + 1):
        for k in range((max_degree - l) // 2 + 1):
            if (l, k) == (0, 0):
                continue
            for n in range(1, multiplicity(l, N) + 1):
                out.append(EigenIndex(l, n, k))
    return out


# -- eigenvalue relations -------------------------------------------------

def _exact_sqrt(q: Fraction):
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def mu_to_lambda(mu, m, N: int):
    """Invert ``mu = (lambda^2 + a lambda)/(1 + a)`` on the positive branch.

    Returns ``(eps, lam)`` with ``eps = a/2 + sqrt(mu (1+a) + a^2/4)`` and
    ``lam = mu (1 + a) / eps``.  Exact Fractions come back when ``mu`` and
    ``m`` are exact and the radical is rational; floats otherwise.
    """
    exact = isinstance(mu, (int, Fraction)) and isinstance(m, (int, Fraction, str))
    if exact:
        mu, m = as_rational(mu), _m_exact(m)
        a = N * (m - 1)
        if mu <= 0:
            raise ValueError(f"mu must be positive, got {mu}")
        root = _exact_sqrt(mu * (1 + a) + a * a / 4)
        if root is not None:
            eps = a / 2 + root
            return eps, mu * (1 + a) / eps
    mu, m = float(mu), float(m)
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if m < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    a = N * (m - 1)
    eps = a / 2 + math.sqrt(mu * (1 + a) + a * a / 4)
    return eps, mu * (1 + a) / eps


@dataclass(frozen=True)
class CrossingSet:
    """Values ``m >= 1`` where two eigenvalue branches coincide.

    ``everywhere`` is set when the two branches are identical.  ``points``
    holds exact Fractions for rational crossings and floats (bracketed to
    1e-12) otherwise, ascending.
    """

    everywhere: bool
    points: Tuple = ()

    def __bool__(self):
        return self.everywhere or bool(self.points)


def _poly_in_a(l: int, k: int, N: int) -> List[Fraction]:
    """``lambda_lk`` as ``[c0, c1]`` in the variable ``a = N(m - 1)``."""
    return [Fraction(l + 2 * k), 2 * k * (k + l + Fraction(N, 2) - 1) / N]


def _polymul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _rational_roots(p: List[Fraction]) -> List[Fraction]:
    """Rational roots of an ascending-coefficient polynomial (rational root theorem)."""
    p = _trim(p)
    if len(p) <= 1:
        return []
    den = 1
    for c in p:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    roots = set()
    # strip zero roots
    while ints and ints[0] == 0:
        roots.add(Fraction(0))
        ints = ints[1:]
    if len(ints) <= 1:
        return sorted(roots)

    def divisors(n):
        n = abs(n)
        small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
        return set(small + [n // d for d in small])

    for pnum in divisors(ints[0]):
        for qden in divisors(ints[-1]):
            for s in (1, -1):
                r = Fraction(s * pnum, qden)
                if sum(c * r**i for i, c in enumerate(ints)) == 0:
                    roots.add(r)
    return sorted(roots)


def _deflate(p: List[Fraction], r: Fraction) -> List[Fraction]:
    # synthetic division by (a - r), ascending coefficients
    desc = p[::-1]
    out = [desc[0]]
    for c in desc[1:-1]:
        out.append(c + out[-1] * r)
    return out[::-1]


def crossing(pair_a: Tuple[int, int], pair_b: Tuple[int, int], N: int, *, strict: bool = True) -> CrossingSet:
    """All ``m >= 1`` at which ``mu_{pair_a}(m) = mu_{pair_b}(m)``.

    Works in ``a = N(m-1) >= 0``: clearing the positive denominator ``1 + a``
    leaves ``lam_A^2 + a lam_A - lam_B^2 - a lam_B``, a polynomial in ``a``
    with rational coefficients.  Rational roots are found exactly; any
    remaining real roots are located numerically and polished by bisection.
    """
    if strict:
        check_index(*pair_a, N)
        check_index(*pair_b, N)
    la, lb = _poly_in_a(*pair_a, N), _poly_in_a(*pair_b, N)
    a_var = [Fraction(0), Fraction(1)]
    lhs = [x - y for x, y in zip(
        _padd(_polymul(la, la), _polymul(a_var, la)),
        _padd(_polymul(lb, lb), _polymul(a_var, lb)),
    )]
    p = _trim(lhs)
    if not p:
        return CrossingSet(everywhere=True)
    exact = [r for r in _rational_roots(p) if r >= 0]
    rest = p
    for r in _rational_roots(p):
        while len(_trim(rest)) > 1 and sum(c * r**i for i, c in enumerate(rest)) == 0:
            rest = _trim(_deflate(rest, r))
    approx = []
    if len(rest) > 2:
        coeffs = [float(c) for c in rest[::-1]]
        for z in np.roots(coeffs):
            if abs(z.imag) < 1e-9 and z.real >= -1e-12:
                approx.append(_bisect_root(rest, max(z.real, 0.0)))
    points = sorted([1 + r / N for r in exact], key=float)
    points += sorted(1 + x / N for x in approx)
    return CrossingSet(everywhere=False, points=tuple(points))


def _padd(p, q):
    n = max(len(p), len(q))
    p = list(p) + [Fraction(0)] * (n - len(p))
    q = list(q) + [Fraction(0)] * (n - len(q))
    return [x + y for x, y in zip(p, q)]


def _bisect_root(p, guess: float, tol: float = 1e-12) -> float:
    def f(x):
        return sum(float(c) * x**i for i, c in enumerate(p))

    lo, hi = guess - 1e-6, guess + 1e-6
    lo = max(lo, 0.0)
    if f(lo) * f(hi) > 0:
        return guess
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def spectrum_table(m, N: int, max_degree: int) -> List[SpectrumEntry]:
    """All ``(l, k)`` with ``l + 2k <= max_degree``, sorted by ``mu`` then ``(l, k)``."""
    if max_degree < 1:
        raise ValueError("max_degree must be at least 1")
    m = _m_exact(m)
    lmax = min(max_degree, 1) if N == 1 else max_degree
    rows = []
    for l in range(lmax + 1):
        for k in range((max_degree - l) // 2 + 1):
            if (l, k) == (0, 0):
                continue
            rows.append(SpectrumEntry(
                l=l, k=k,
                lam=lambda_eig(l, k, m, N),
                mu=mu_eig(l, k, m, N),
                multiplicity=multiplicity(l, N),
            ))
    rows.sort(key=lambda e: (e.mu, e.l, e.k))
    return rows
