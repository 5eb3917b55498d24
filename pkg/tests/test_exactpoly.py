from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from dhspec.exactpoly import (MultiPoly, apply_HE, apply_HI, apply_HI_direct, as_rational, euler_grad,
                              is_harmonic, laplacian, poly_arith)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def polys(draw, dim=None, max_degree=4):
    dim = dim or draw(st.integers(1, 3))
    nterms = draw(st.integers(0, 5))
    terms = {}
    for _ in range(nterms):
        idx = tuple(draw(st.lists(st.integers(0, max_degree), min_size=dim, max_size=dim)))
        if sum(idx) > max_degree:
            continue
        terms[idx] = draw(fractions)
    return MultiPoly(dim, terms)


@st.composite
def poly_pairs(draw):
    dim = draw(st.integers(1, 3))
    return draw(polys(dim)), draw(polys(dim)), draw(polys(dim))


rationals_m = st.sampled_from([Fraction(1), Fraction(5, 4), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(7, 3)])


def to_sympy(p: MultiPoly):
    xs = sp.symbols(f"x1:{p.dim + 1}")
    expr = sum((sp.Rational(c.numerator, c.denominator) * sp.Mul(*[x**a for x, a in zip(xs, idx)])
                for idx, c in p.terms.items()), sp.Integer(0))
    return expr, xs


def sympy_HE(p: MultiPoly, m: Fraction, N: int):
    expr, xs = to_sympy(p)
    lap = sum(sp.diff(expr, x, 2) for x in xs)
    euler = sum(x * sp.diff(expr, x) for x in xs)
    r2 = sum(x**2 for x in xs)
    mm = sp.Rational(m.numerator, m.denominator)
    if m == 1:
        return sp.expand(-lap + euler), xs
    return sp.expand(-(mm - 1) / 2 * (1 - r2) * lap + euler), xs


def same(p: MultiPoly, expr, xs) -> bool:
    ours, _ = to_sympy(p)
    return sp.expand(ours - expr) == 0


@given(poly_pairs())
def test_ring_axioms(triple):
    p, q, r = triple
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert p * (q + r) == p * q + p * r
    assert (p - p).is_zero()
    assert p * MultiPoly.constant(p.dim, 1) == p


@given(poly_pairs())
def test_multiplication_matches_sympy(triple):
    p, q, _ = triple
    a, xs = to_sympy(p)
    b, _ = to_sympy(q)
    assert same(p * q, sp.expand(a * b), xs)


@given(polys())
def test_text_round_trip(p):
    assert MultiPoly.from_text(p.to_text(), p.dim) == p


def test_text_format_is_descending_grlex():
    p = MultiPoly(2, {(0, 0): 1, (1, 0): Fraction(-3, 2), (0, 2): 2, (2, 0): 1})
    assert p.to_text() == "1 * x1^2 + 2 * x2^2 + -3/2 * x1 + 1"
    assert MultiPoly.zero(3).to_text() == "0"


def test_from_text_accepts_minus_and_bare_monomials():
    p = MultiPoly.from_text("x1^2 - 3/2*x1*x2 + 4", 2)
    assert p == MultiPoly(2, {(2, 0): 1, (1, 1): Fraction(-3, 2), (0, 0): 4})
    with pytest.raises(ValueError):
        MultiPoly.from_text("x3", 2)
    with pytest.raises(ValueError):
        MultiPoly.from_text("", 1)


@given(polys(), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_evaluate_matches_sympy(p, pt):
    expr, xs = to_sympy(p)
    val = float(expr.subs({x: c for x, c in zip(xs, pt)}))
    got = float(p.evaluate(np.array([pt[: p.dim]]))[0])
    assert got == pytest.approx(val, rel=1e-12, abs=1e-12)


@given(polys())
def test_laplacian_and_euler_match_sympy(p):
    expr, xs = to_sympy(p)
    assert same(laplacian(p), sum(sp.diff(expr, x, 2) for x in xs), xs)
    assert same(euler_grad(p), sp.expand(sum(x * sp.diff(expr, x) for x in xs)), xs)


@settings(max_examples=60)
@given(polys(), rationals_m)
def test_HE_matches_sympy(p, m):
    expr, xs = sympy_HE(p, m, p.dim)
    assert same(apply_HE(p, m, p.dim), expr, xs)


@settings(max_examples=60)
@given(polys(), rationals_m)
def test_HI_two_routes_agree(p, m):
    assert apply_HI(p, m, p.dim) == apply_HI_direct(p, m, p.dim)


def test_HI_matches_sympy_composition():
    p = MultiPoly.from_text("x1^3 x2 + 2/3 * x2^2 + x1", 2)
    m = Fraction(3, 2)
    he, xs = sympy_HE(p, m, 2)
    # the second application runs on the sympy result converted back
    back = MultiPoly(2, {tuple(mon): Fraction(int(c.p), int(c.q))
                         for mon, c in sp.Poly(he, *xs).terms()})
    he2, _ = sympy_HE(back, m, 2)
    a = sp.Rational(1)  # N(m-1) = 1
    assert same(apply_HI(p, m, 2), sp.expand((he2 + a * he) / (1 + a)), xs)


def test_harmonic_check():
    assert is_harmonic(MultiPoly.from_text("x1^2 - x2^2", 2))
    assert not is_harmonic(MultiPoly.radius_squared(2))


def test_as_rational_rules():
    assert as_rational("3/2") == Fraction(3, 2)
    assert as_rational("1.25") == Fraction(5, 4)
    assert as_rational(2) == Fraction(2)
    with pytest.raises(TypeError):
        as_rational(1.5)
    with pytest.raises(TypeError):
        as_rational(True)


def test_operator_validation():
    p = MultiPoly.variable(0, 2)
    with pytest.raises(ValueError, match="m >= 1"):
        apply_HE(p, Fraction(1, 2), 2)
    with pytest.raises(ValueError, match="dimension"):
        apply_HE(p, 2, 3)
    with pytest.raises(ValueError):
        p + MultiPoly.variable(0, 1)


def test_poly_arith_dispatch():
    x = MultiPoly.variable(0, 1)
    assert poly_arith(x, x, "mul") == x**2
    assert poly_arith(x, Fraction(1, 2), "scale") == x / 2
    with pytest.raises(ValueError):
        poly_arith(x, x, "pow")


def test_leading_coefficient_and_degree():
    p = MultiPoly.from_text("3 * x1^2 x2 + -5 * x2^3 + x1", 2)
    assert p.degree == 3
    assert p.leading_coefficient() in (Fraction(3), Fraction(-5))
    assert p.coefficient((1, 0)) == 1
