"""Exact multivariate polynomials over the rationals.

Polynomials are sparse maps from multi-indices to :class:`fractions.Fraction`
coefficients.  Besides the ring operations this module provides the
differential operators needed to apply the porous-medium displacement Hessian
``H_E`` and the fourth-order displacement Hessian ``H_I`` symbolically::

    H_E psi = -(m-1)/2 (1-|x|^2) Lap psi + x.grad psi     (m > 1)
    H_E psi = -Lap psi + x.grad psi                       (m = 1)
    H_I     = (H_E^2 + N(m-1) H_E) / (1 + N(m-1))

The operators run on integer numerators over a common denominator, which
keeps the exact eigen-checks fast enough to sweep whole spectra.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np

Rational = Fraction
Index = Tuple[int, ...]
Scalar = Union[int, Fraction]

__all__ = [
    "Rational",
    "MultiPoly",
    "poly_arith",
    "laplacian",
    "euler_grad",
    "apply_HE",
    "apply_HI",
    "apply_HI_direct",
    "is_harmonic",
    "as_rational",
]


def as_rational(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"``/decimal strings to a Fraction.

    Floats are rejected: the symbolic layer never guesses a rational.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def _grlex_key(index: Index):
    return (sum(index), index)


class MultiPoly:
    """Sparse polynomial in ``dim`` variables with rational coefficients.

    Instances are treated as immutable values; every operation returns a new
    polynomial.  Zero coefficients are never stored, so two polynomials are
    equal exactly when their term maps are equal.

    Parameters
    ----------
    dim : int
        Number of variables ``x1 .. x_dim``.
    terms : mapping, optional
        Multi-index -> coefficient.  Coefficients may be ints, Fractions or
        ``"p/q"`` strings.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Index, Scalar] | None = None):
        if dim < 1:
            raise ValueError("dimension must be a positive integer")
        self.dim = int(dim)
        clean: Dict[Index, Fraction] = {}
        if terms:
            for idx, c in terms.items():
                idx = tuple(int(a) for a in idx)
                if len(idx) != self.dim or min(idx) < 0:
                    raise ValueError(f"bad multi-index {idx} for dimension {dim}")
                c = as_rational(c)
                if c:
                    clean[idx] = clean.get(idx, Fraction(0)) + c
                    if not clean[idx]:
                        del clean[idx]
        self.terms = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, dim: int, terms: Dict[Index, Fraction]) -> "MultiPoly":
        # caller guarantees valid indices and no zero coefficients
        p = object.__new__(cls)
        p.dim = dim
        p.terms = terms
        return p

    @classmethod
    def zero(cls, dim: int) -> "MultiPoly":
        return cls._raw(dim, {})

    @classmethod
    def constant(cls, dim: int, c: Scalar = 1) -> "MultiPoly":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def monomial(cls, index: Iterable[int], coef: Scalar = 1) -> "MultiPoly":
        index = tuple(index)
        return cls(len(index), {index: coef})

    @classmethod
    def variable(cls, i: int, dim: int) -> "MultiPoly":
        """The coordinate ``x_{i+1}`` (0-based ``i``)."""
        idx = [0] * dim
        idx[i] = 1
        return cls(dim, {tuple(idx): 1})

    @classmethod
    def radius_squared(cls, dim: int) -> "MultiPoly":
        """``|x|^2 = x1^2 + ... + x_dim^2``."""
        terms = {}
        for i in range(dim):
            idx = [0] * dim
            idx[i] = 2
            terms[tuple(idx)] = Fraction(1)
        return cls._raw(dim, terms)

    # -- basic properties -------------------------------------------------
    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(i) for i in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(i) for i in self.terms)

    def sorted_terms(self):
        """Terms in descending graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return self.sorted_terms()[0][1]

    def coefficient(self, index: Iterable[int]) -> Fraction:
        return self.terms.get(tuple(index), Fraction(0))

    def __repr__(self):
        return f"MultiPoly({self.dim}, {self.to_text()!r})"

    def __str__(self):
        return self.to_text()

    # -- ring operations --------------------------------------------------
    def _check(self, other: "MultiPoly"):
        if not isinstance(other, MultiPoly):
            raise TypeError(f"expected MultiPoly, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return MultiPoly.constant(self.dim, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for idx, c in other.terms.items():
            s = out.get(idx, 0) + c
            if s:
                out[idx] = s
            else:
                out.pop(idx, None)
        return MultiPoly._raw(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.dim, {i: -c for i, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c: Scalar) -> "MultiPoly":
        c = as_rational(c)
        if not c:
            return MultiPoly.zero(self.dim)
        return MultiPoly._raw(self.dim, {i: a * c for i, a in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check(other)
        den_a, a = _to_int(self)
        den_b, b = _to_int(other)
        out: Dict[Index, int] = {}
        for ia, ca in a.items():
            for ib, cb in b.items():
                idx = tuple(x + y for x, y in zip(ia, ib))
                out[idx] = out.get(idx, 0) + ca * cb
        return _from_int(self.dim, den_a * den_b, out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, (int, Fraction)) and not isinstance(c, bool):
            return self.scale(1 / Fraction(c))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = MultiPoly.constant(self.dim, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.dim == other.dim and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self == MultiPoly.constant(self.dim, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    # -- calculus ---------------------------------------------------------
    def diff(self, i: int) -> "MultiPoly":
        """Partial derivative with respect to ``x_{i+1}``."""
        out = {}
        for idx, c in self.terms.items():
            a = idx[i]
            if a:
                j = list(idx)
                j[i] -= 1
                out[tuple(j)] = c * a
        return MultiPoly._raw(self.dim, out)

    def gradient(self):
        return [self.diff(i) for i in range(self.dim)]

    def hessian(self):
        g = self.gradient()
        return [[g[i].diff(j) for j in range(self.dim)] for i in range(self.dim)]

    # -- numerics ---------------------------------------------------------
    def evaluate(self, points) -> np.ndarray:
        """Evaluate in floating point at ``points`` of shape ``(..., dim)``.

        For ``dim == 1`` a plain array of abscissae is accepted as well.
        """
        pts = np.asarray(points, dtype=float)
        if self.dim == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points have trailing size {pts.shape[-1]}, expected {self.dim}")
        out = np.zeros(pts.shape[:-1])
        if not self.terms:
            return out
        maxdeg = max(max(i) for i in self.terms)
        # powers[k][..., j] = x_j ** k
        powers = [np.ones_like(pts)]
        for _ in range(maxdeg):
            powers.append(powers[-1] * pts)
        for idx, c in self.terms.items():
            term = np.full(pts.shape[:-1], float(c))
            for j, a in enumerate(idx):
                if a:
                    term = term * powers[a][..., j]
            out = out + term
        return out

    def evaluate_gradient(self, points) -> np.ndarray:
        """Gradient at ``points``; returns shape ``(..., dim)``."""
        return np.stack([d.evaluate(points) for d in self.gradient()], axis=-1)

    # -- text form --------------------------------------------------------
    def to_text(self) -> str:
        """``coef * x1^a x2^b`` terms joined by `` + ``, descending grlex."""
        if not self.terms:
            return "0"
        parts = []
        for idx, c in self.sorted_terms():
            mono = " ".join(
                f"x{j + 1}" if a == 1 else f"x{j + 1}^{a}" for j, a in enumerate(idx) if a
            )
            parts.append(f"{c} * {mono}" if mono else f"{c}")
        return " + ".join(parts)

    @classmethod
    def from_text(cls, text: str, dim: int) -> "MultiPoly":
        """Parse the format produced by :meth:`to_text`.

        Also accepts ``-`` as a separator, omitted coefficients (``x1^2``) and
        ``*`` between variables.
        """
        s = text.replace("**", "^").replace(" ", "")
        if not s:
            raise ValueError("empty polynomial text")
        s = re.sub(r"(?<=[^\^+*/-])-", "+-", s)
        terms: Dict[Index, Fraction] = {}
        for chunk in s.split("+"):
            if not chunk:
                raise ValueError(f"malformed polynomial text: {text!r}")
            sign = 1
            while chunk.startswith("-"):
                sign = -sign
                chunk = chunk[1:]
            coef = Fraction(sign)
            idx = [0] * dim
            for factor in filter(None, chunk.split("*")):
                m = re.fullmatch(r"x(\d+)(?:\^(\d+))?", factor)
                if m:
                    var = int(m.group(1)) - 1
                    if not 0 <= var < dim:
                        raise ValueError(f"variable x{var + 1} outside dimension {dim}")
                    idx[var] += int(m.group(2) or 1)
                    continue
                # coefficient glued to variables, e.g. "3/2x1^2x2"
                m = re.fullmatch(r"([0-9./]+)?((?:x\d+(?:\^\d+)?)*)", factor)
                if not m or not factor:
                    raise ValueError(f"cannot parse factor {factor!r}")
                if m.group(1):
                    coef *= Fraction(m.group(1))
                for v, e in re.findall(r"x(\d+)(?:\^(\d+))?", m.group(2) or ""):
                    var = int(v) - 1
                    if not 0 <= var < dim:
                        raise ValueError(f"variable x{var + 1} outside dimension {dim}")
                    idx[var] += int(e or 1)
            key = tuple(idx)
            terms[key] = terms.get(key, Fraction(0)) + coef
        return cls(dim, terms)


# -- integer fast path ------------------------------------------------------

def _to_int(p: MultiPoly):
    """Return ``(D, {index: int})`` with ``p = (1/D) * sum``."""
    den = 1
    for c in p.terms.values():
        d = c.denominator
        den = den * d // gcd(den, d)
    return den, {i: c.numerator * (den // c.denominator) for i, c in p.terms.items()}


def _from_int(dim: int, den: int, terms: Dict[Index, int]) -> MultiPoly:
    return MultiPoly._raw(dim, {i: Fraction(c, den) for i, c in terms.items() if c})


def _lap_int(dim: int, terms: Dict[Index, int]) -> Dict[Index, int]:
    out: Dict[Index, int] = {}
    for idx, c in terms.items():
        for i, a in enumerate(idx):
            if a >= 2:
                j = idx[:i] + (a - 2,) + idx[i + 1:]
                out[j] = out.get(j, 0) + c * a * (a - 1)
    return out


def _mul_one_minus_r2_int(dim: int, terms: Dict[Index, int]) -> Dict[Index, int]:
    out = dict(terms)
    for idx, c in terms.items():
        for i in range(dim):
            j = idx[:i] + (idx[i] + 2,) + idx[i + 1:]
            out[j] = out.get(j, 0) - c
    return out


def _he_int(dim: int, den: int, terms: Dict[Index, int], m: Fraction):
    """Integer-numerator image of H_E; returns ``(D', terms')``."""
    lap = _lap_int(dim, terms)
    if m == 1:
        out = {i: c * sum(i) for i, c in terms.items()}
        for i, c in lap.items():
            out[i] = out.get(i, 0) - c
        return den, out
    P, Q = m.numerator, m.denominator
    # 2Q * H_E = 2Q x.grad - (P - Q)(1 - |x|^2) Lap
    out = {i: 2 * Q * c * sum(i) for i, c in terms.items()}
    for i, c in _mul_one_minus_r2_int(dim, lap).items():
        out[i] = out.get(i, 0) - (P - Q) * c
    return 2 * Q * den, out


def _validate(p: MultiPoly, m, N: int) -> Fraction:
    m = as_rational(m)
    if m < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    if p.dim != N:
        raise ValueError(f"polynomial dimension {p.dim} does not match N={N}")
    return m


# -- public operations ----------------------------------------------------

def poly_arith(p: MultiPoly, q, op: str) -> MultiPoly:
    """Apply ``op`` in {"add", "sub", "mul", "scale"}; ``q`` is a scalar for scale."""
    if op == "scale":
        return p.scale(q)
    p._check(q)
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown operation {op!r}")


def laplacian(p: MultiPoly) -> MultiPoly:
    den, t = _to_int(p)
    return _from_int(p.dim, den, _lap_int(p.dim, t))


def euler_grad(p: MultiPoly) -> MultiPoly:
    """``x . grad p``: every monomial is multiplied by its total degree."""
    return MultiPoly._raw(p.dim, {i: c * sum(i) for i, c in p.terms.items() if sum(i)})


def is_harmonic(p: MultiPoly) -> bool:
    return laplacian(p).is_zero()


def apply_HE(p: MultiPoly, m, N: int) -> MultiPoly:
    """Exact image of ``p`` under the porous-medium displacement Hessian."""
    m = _validate(p, m, N)
    den, t = _to_int(p)
    den, t = _he_int(N, den, t, m)
    return _from_int(N, den, t)


def apply_HI(p: MultiPoly, m, N: int) -> MultiPoly:
    """``(H_E^2 p + N(m-1) H_E p) / (1 + N(m-1))`` computed exactly."""
    m = _validate(p, m, N)
    a = N * (m - 1)
    den, t = _to_int(p)
    d1, h1 = _he_int(N, den, t, m)
    d2, h2 = _he_int(N, d1, h1, m)
    # combine h2/d2 + a*h1/d1 over d2 (d1 divides d2)
    f = d2 // d1
    an, ad = a.numerator, a.denominator
    out = {i: c * ad for i, c in h2.items()}
    for i, c in h1.items():
        out[i] = out.get(i, 0) + an * f * c
    # divide by (1 + a) = (ad + an)/ad
    return _from_int(N, d2 * (ad + an), out)


def apply_HI_direct(p: MultiPoly, m, N: int) -> MultiPoly:
    """Single expanded formula for ``H_I``, independent of :func:`apply_HE`.

    With ``E = x.grad``, ``L = Lap``, ``w = 1 - |x|^2`` and ``k = (m-1)/2``::

        H_E^2 = k^2 w (w L^2 - 4 E L - 2N L) - k w (E L + 2 L)
                - k (w E L - 2|x|^2 L) + E^2          (m > 1)
        H_E^2 = L^2 - 2 E L - 2 L + E^2               (m = 1)
    """
    m = _validate(p, m, N)
    a = N * (m - 1)
    L = laplacian(p)
    LL = laplacian(L)
    EL = euler_grad(L)
    Ep = euler_grad(p)
    EE = euler_grad(Ep)
    r2 = MultiPoly.radius_squared(N)
    if m == 1:
        he = Ep - L
        he2 = LL - 2 * EL - 2 * L + EE
    else:
        k = (m - 1) / 2
        w = 1 - r2
        he = Ep - k * (w * L)
        he2 = (k * k) * (w * (w * LL - 4 * EL - (2 * N) * L)) \
            - k * (w * (EL + 2 * L)) \
            - k * (w * EL - 2 * (r2 * L)) + EE
    return (he2 + a * he) / (1 + a)
