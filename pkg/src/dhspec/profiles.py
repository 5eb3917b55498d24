"""Barenblatt profiles, entropy densities and the self-similar rescaling.

Normalization: the confined profile ``v_*`` satisfies
``e'(v_*(r)) = (1 - r^2)_+ / 2`` with ``e(z) = z^m/(m-1)`` for ``m > 1`` and
``e(z) = z ln z`` for ``m = 1``.  We take ``e'(z) = ln z + 1`` at ``m = 1``,
so there ``v_* = exp(-1/2 - r^2/2)``.  Every spectral quantity is invariant
under a constant rescaling of the weight, so this choice is immaterial for
the operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import special

__all__ = [
    "Params",
    "entropy_density",
    "barenblatt",
    "barenblatt_log_gradient",
    "derive_constants",
    "scaling_AB",
    "self_similar_mass",
    "sigma_for_mass",
    "params_for_mass",
    "profile_mass",
    "profile_mass_exact",
    "rescale_map",
    "sphere_area",
]


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def _as_number(m):
    """Keep exact rationals exact; everything else becomes float."""
    if isinstance(m, Fraction):
        return m
    if isinstance(m, int) and not isinstance(m, bool):
        return Fraction(m)
    if isinstance(m, str):
        return Fraction(m)
    return float(m)


@dataclass(frozen=True)
class Params:
    """Exponent, dimension and the derived scaling constants.

    ``alpha``, ``gamma_sq`` and ``theta`` are Fractions whenever ``m`` is
    rational; ``gamma`` is exact only when ``gamma_sq`` is a perfect square.
    ``sigma_M``, ``A``, ``B`` and ``M`` are filled in once a mass (or
    ``sigma_M``) is fixed.
    """

    m: object
    N: int
    alpha: object
    gamma_sq: object
    gamma: object
    theta: object
    sigma_M: Optional[float] = None
    A: Optional[float] = None
    B: Optional[float] = None
    M: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in asdict(self).items()}


def entropy_density(z, m):
    """Return ``(e(z), e'(z))``.

    ``m = 1``: ``e = z ln z``, ``e' = ln z + 1`` (requires ``z > 0``).
    ``m > 1``: ``e = z^m/(m-1)``, ``e' = m z^(m-1)/(m-1)`` (requires ``z >= 0``).
    """
    m = float(m)
    z = np.asarray(z, dtype=float)
    if m < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    if m == 1:
        if np.any(z <= 0):
            raise ValueError("entropy density at m=1 needs z > 0")
        lz = np.log(z)
        e, ep = z * lz, lz + 1.0
    else:
        if np.any(z < 0):
            raise ValueError("entropy density needs z >= 0")
        e = z**m / (m - 1)
        ep = m * z ** (m - 1) / (m - 1)
    if e.ndim == 0:
        return float(e), float(ep)
    return e, ep


def barenblatt(r, m, N: int = 1):
    """Confined Barenblatt profile ``v_*(r)``.

    ``m > 1``: ``((m-1)/(2m) (1 - r^2)_+)^(1/(m-1))``;
    ``m = 1``: ``exp(-1/2 - r^2/2)``.  ``N`` does not enter the profile.
    """
    m = float(m)
    if m < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    r = np.asarray(r, dtype=float)
    r2 = r * r
    if m == 1:
        out = np.exp(-0.5 - 0.5 * r2)
    else:
        base = (m - 1) / (2 * m) * np.clip(1.0 - r2, 0.0, None)
        out = base ** (1.0 / (m - 1))
    return float(out) if out.ndim == 0 else out


def barenblatt_log_gradient(x, m) -> np.ndarray:
    """``grad log v_*`` at points ``x`` of shape ``(..., N)`` inside the support."""
    m = float(m)
    x = np.asarray(x, dtype=float)
    if m == 1:
        return -x
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    return -2.0 * x / ((m - 1) * (1.0 - r2))


def derive_constants(m, N: int) -> Params:
    """``alpha``, ``gamma`` and ``theta`` for the pair ``(m, N)``."""
    m = _as_number(m)
    if m < 1:
        raise ValueError(f"m must satisfy m >= 1, got {m}")
    if N < 1:
        raise ValueError("N must be a positive integer")
    a = N * (m - 1)
    alpha = 1 / (N * (2 * m - 2) + 4)
    gamma_sq = alpha * m * m / (2 * (2 * m - 1) * (a + 1))
    theta = 2 * m * m / ((2 * m - 1) * (a + 1))
    if isinstance(gamma_sq, Fraction):
        gamma = _exact_sqrt(gamma_sq)
        if gamma is None:
            gamma = math.sqrt(gamma_sq)
    else:
        gamma = math.sqrt(gamma_sq)
    return Params(m=m, N=N, alpha=alpha, gamma_sq=gamma_sq, gamma=gamma, theta=theta)


def scaling_AB(m, N: int, sigma_M: float):
    """Normalization constants ``(A, B)`` of the confined rescaling."""
    p = derive_constants(m, N)
    if float(m) == 1:
        return 2.0**0.25, math.exp(float(sigma_M) - 0.5)
    if sigma_M <= 0:
        raise ValueError("sigma_M must be positive when m > 1")
    A = math.sqrt(float(sigma_M) / float(p.gamma))
    B = (2.0 * float(sigma_M)) ** (1.0 / (float(m) - 1.0))
    return A, B


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in ``R^N`` (2 for ``N = 1``)."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def profile_mass_exact(m, N: int) -> float:
    """Closed-form ``int v_* dx`` (Beta/Gaussian integrals); the quadrature oracle."""
    m = float(m)
    if m == 1:
        return math.exp(-0.5) * (2 * math.pi) ** (N / 2)
    p = 1.0 / (m - 1)
    c = (m - 1) / (2 * m)
    # int_{B_1} (1-|x|^2)^p dx = pi^{N/2} Gamma(p+1) / Gamma(p+1+N/2)
    log_ball = (N / 2) * math.log(math.pi) + special.gammaln(p + 1) - special.gammaln(p + 1 + N / 2)
    return c**p * math.exp(log_ball)


def profile_mass(m, N: int, order: int = 32) -> float:
    """``int v_* dx`` by Gauss quadrature in ``t = r^2`` (resp. ``r^2/2``)."""
    m = float(m)
    if m == 1:
        # r^{N-1} e^{-r^2/2} dr = 2^{N/2-1} t^{N/2-1} e^{-t} dt
        t, w = special.roots_genlaguerre(order, N / 2 - 1)
        radial = 2 ** (N / 2 - 1) * np.sum(w)
        return float(math.exp(-0.5) * sphere_area(N) * radial)
    p = 1.0 / (m - 1)
    c = (m - 1) / (2 * m)
    # r^{N-1}(1-r^2)^p dr = (1/2) t^{N/2-1} (1-t)^p dt; Jacobi on [-1,1] in u=2t-1
    u, w = special.roots_jacobi(order, p, N / 2 - 1)
    radial = 0.5 * np.sum(w) / 2 ** (p + N / 2)
    return float(c**p * sphere_area(N) * radial)


def self_similar_mass(m, N: int, sigma_M: float) -> float:
    """Mass of the unrescaled source profile with parameter ``sigma_M``.

    ``e'(u(r)) = sigma_M - gamma r^2`` (``m = 1``) or its positive part
    (``m > 1``).
    """
    p = derive_constants(m, N)
    g = float(p.gamma)
    m = float(m)
    if m == 1:
        # e' = ln u + 1
        return math.exp(sigma_M - 1.0) * (math.pi / g) ** (N / 2)
    if sigma_M <= 0:
        raise ValueError("sigma_M must be positive when m > 1")
    q = 1.0 / (m - 1)
    R = math.sqrt(sigma_M / g)
    # u = ((m-1)/m sigma (1 - (r/R)^2))^q on the ball of radius R
    amp = ((m - 1) / m * sigma_M) ** q
    log_ball = (N / 2) * math.log(math.pi) + special.gammaln(q + 1) - special.gammaln(q + 1 + N / 2)
    return amp * R**N * math.exp(log_ball)


def sigma_for_mass(m, N: int, M: float, tol: float = 1e-12) -> float:
    """Invert the strictly increasing map ``sigma_M -> M`` by bisection."""
    if M <= 0:
        raise ValueError("mass must be positive")
    lo, hi = (1e-12, 1.0) if float(m) > 1 else (-1.0, 1.0)
    while self_similar_mass(m, N, hi) < M:
        hi = 2 * hi if hi > 0 else hi + 1.0
    while float(m) == 1 and self_similar_mass(m, N, lo) > M:
        lo -= 1.0
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if self_similar_mass(m, N, mid) < M:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def params_for_mass(m, N: int, M: float) -> Params:
    p = derive_constants(m, N)
    sigma = sigma_for_mass(m, N, M)
    A, B = scaling_AB(m, N, sigma)
    return Params(**{**p.__dict__, "sigma_M": sigma, "A": A, "B": B, "M": M})


def rescale_map(direction: str, t, x, value, params: Params):
    """Change variables between the self-similar and confined frames.

    ``forward``: ``(t, x, u) -> (t_hat, x_hat, v)`` with
    ``t_hat = alpha log t``, ``x_hat = x/(A t^alpha)``, ``v = t^(N alpha) u / B``.
    ``inverse`` undoes it.
    """
    if params.A is None or params.B is None:
        raise ValueError("params need A and B; build them with params_for_mass")
    alpha = float(params.alpha)
    A, B, N = params.A, params.B, params.N
    x = np.asarray(x, dtype=float)
    if direction == "forward":
        if t <= 0:
            raise ValueError("t must be positive")
        return alpha * math.log(t), x / (A * t**alpha), t ** (N * alpha) * np.asarray(value) / B
    if direction == "inverse":
        t_real = math.exp(t / alpha)
        return t_real, A * t_real**alpha * x, B * np.asarray(value) / t_real ** (N * alpha)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
