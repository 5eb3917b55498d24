import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import hermite_e

from dhspec.exactpoly import MultiPoly, apply_HE, apply_HI, is_harmonic
from dhspec.spectra import (EigenIndex, check_index, crossing, eigen_indices, eigenfunction, hermite,
                            hermite_1d, lambda_eig, mu_eig, mu_to_lambda, multiplicity, solid_harmonic,
                            spectrum_table)

ms = st.sampled_from([Fraction(1), Fraction(5, 4), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(11, 7)])


def test_spectrum_examples():
    rows = spectrum_table(Fraction(3, 2), 1, 2)
    assert [(r.l, r.k, r.mu) for r in rows] == [(1, 0, 1), (0, 1, 5)]
    assert [r.mu for r in spectrum_table(1, 2, 4)] == sorted(r.lam**2 for r in spectrum_table(1, 2, 4))


def test_mu_11_value():
    # lambda_11 = 3 + 2 (1 + N/2) (m-1); at m = 2, N = 2 this is 7 and mu = (49 + 14)/3
    assert lambda_eig(1, 1, 2, 2) == 7
    assert mu_eig(1, 1, 2, 2) == 21
    # m = 3/2, N = 1: lambda = 3 + 2 * 1.5 * 0.5 = 9/2, a = 1/2
    assert mu_eig(1, 1, Fraction(3, 2), 1) == (Fraction(81, 4) + Fraction(9, 4)) / Fraction(3, 2)


@given(ms, st.integers(1, 3))
def test_lowest_mu_is_one(m, N):
    assert mu_eig(1, 0, m, N) == 1
    assert multiplicity(1, N) == N
    assert spectrum_table(m, N, 3)[0].mu == 1


@given(st.integers(0, 9), st.integers(2, 5))
def test_multiplicity_matches_homogeneous_count(l, N):
    # dim harmonics of degree l = dim P_l - dim P_{l-2}
    expected = math.comb(l + N - 1, N - 1) - (math.comb(l + N - 3, N - 1) if l >= 2 else 0)
    assert multiplicity(l, N) == expected


@given(st.integers(0, 6), st.integers(2, 3))
def test_solid_harmonics_are_harmonic_and_independent(l, N):
    basis = [solid_harmonic(l, n, N) for n in range(1, multiplicity(l, N) + 1)]
    assert all(is_harmonic(Y) for Y in basis)
    assert all(Y.degree == l for Y in basis)
    monos = sorted({i for Y in basis for i in Y.terms})
    mat = np.array([[float(Y.coefficient(i)) for i in monos] for Y in basis])
    assert np.linalg.matrix_rank(mat) == len(basis)


@settings(max_examples=30, deadline=None)
@given(ms, st.integers(1, 3), st.integers(0, 4), st.integers(0, 3))
def test_eigenfunctions_exact(m, N, l, k):
    if N == 1 and l > 1 or (l, k) == (0, 0):
        return
    idx = EigenIndex(l, 1, k)
    psi = eigenfunction(idx, m, N)
    assert psi.degree == l + 2 * k
    assert apply_HE(psi, m, N) == psi * lambda_eig(l, k, m, N)
    assert apply_HI(psi, m, N) == psi * mu_eig(l, k, m, N)


def test_hermite_matches_numpy():
    for n in range(10):
        ref = hermite_e.herme2poly([0] * n + [1])
        assert [float(c) for c in hermite_1d(n)] == pytest.approx(list(ref), abs=0)


def test_hermite_products_are_OU_eigenfunctions():
    for alpha in [(3,), (2, 1), (1, 1, 2), (0, 4)]:
        psi = hermite(alpha)
        assert apply_HE(psi, 1, len(alpha)) == psi * sum(alpha)


@given(ms, st.integers(1, 3), st.integers(0, 3), st.integers(0, 3))
def test_mu_to_lambda_round_trip(m, N, l, k):
    if (l, k) == (0, 0) or (N == 1 and l > 1):
        return
    lam = lambda_eig(l, k, m, N)
    eps, back = mu_to_lambda(mu_eig(l, k, m, N), m, N)
    assert back == lam if isinstance(back, Fraction) else back == pytest.approx(float(lam), rel=1e-12)
    assert float(eps) == pytest.approx(float(lam) + float(N * (m - 1)), rel=1e-12)


def test_mu_to_lambda_float_path():
    eps, lam = mu_to_lambda(2.0, 1.3, 2)
    a = 0.6
    assert (lam * lam + a * lam) / (1 + a) == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(ValueError):
        mu_to_lambda(0, 2, 1)


def test_crossing_examples():
    assert crossing((0, 1), (3, 0), 2).points == (Fraction(3, 2),)
    assert crossing((0, 1), (3, 0), 3).points == (Fraction(4, 3),)
    assert crossing((0, 1), (3, 0), 1, strict=False).points == (Fraction(2),)
    assert crossing((1, 0), (1, 0), 2).everywhere
    with pytest.raises(ValueError):
        crossing((0, 1), (3, 0), 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(0, 3), st.integers(0, 4), st.integers(0, 3), st.integers(2, 4))
def test_crossing_points_are_roots(la, ka, lb, kb, N):
    if (la, ka) == (0, 0) or (lb, kb) == (0, 0):
        return
    cs = crossing((la, ka), (lb, kb), N)
    if cs.everywhere:
        assert (la, ka) == (lb, kb) or mu_eig(la, ka, 2, N) == mu_eig(lb, kb, 2, N)
        return
    for m in cs.points:
        assert m >= 1
        if isinstance(m, Fraction):
            assert mu_eig(la, ka, m, N) == mu_eig(lb, kb, m, N)
        else:
            def mu(l, k):
                lam = l + 2 * k + 2 * k * (k + l + N / 2 - 1) * (m - 1)
                a = N * (m - 1)
                return (lam * lam + a * lam) / (1 + a)
            assert mu(la, ka) == pytest.approx(mu(lb, kb), rel=1e-8)


def test_index_validation():
    with pytest.raises(ValueError):
        check_index(2, 0, 1)
    with pytest.raises(ValueError):
        check_index(0, 0, 2)
    with pytest.raises(ValueError):
        lambda_eig(1, 0, Fraction(1, 2), 1)
    with pytest.raises(ValueError):
        spectrum_table(2, 1, 0)


def test_eigen_index_enumeration_counts():
    # number of (l, n, k) with l + 2k <= d equals dim of polynomials of degree <= d minus constants
    for N in (1, 2, 3):
        for d in (1, 4, 6):
            assert len(eigen_indices(N, d)) == math.comb(d + N, N) - 1
