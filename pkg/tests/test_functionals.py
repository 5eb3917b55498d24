import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate as sint

from dhspec.exactpoly import MultiPoly
from dhspec.functionals import (FAMILIES, TestDensity as Density, default_rule, entropy_E, exponential_mixture,
                                fisher_I, gradE_gnorm, hessian_spot_check, polynomial_multiplier,
                                relation_residual, relation_terms, test_family as make_family)
from dhspec.profiles import barenblatt, derive_constants, profile_mass_exact
from dhspec.spectra import EigenIndex, eigenfunction


def quad_1d(f, m):
    lim = 14.0 if float(m) == 1 else 1.0
    return sint.quad(f, -lim, lim, limit=400, epsabs=1e-13, epsrel=1e-11)[0]


@pytest.mark.parametrize("m", [1, Fraction(3, 2), 2])
def test_functionals_at_profile_match_direct_integration(m):
    mf = float(m)
    rule = default_rule(m, 1)
    g = Density("ground", 1)
    v = lambda x: barenblatt(x, mf)
    if mf == 1:
        e = lambda z: z * math.log(z)
    else:
        e = lambda z: z**mf / (mf - 1)
    E_ref = quad_1d(lambda x: e(v(x)) + 0.5 * x * x * v(x) if v(x) > 0 else 0.0, m)
    assert entropy_E(g, m, rule) == pytest.approx(E_ref, rel=1e-10)
    theta = float(derive_constants(m, 1).theta)
    h = 1e-5

    def dens(x):
        if v(x) <= 0:
            return 0.0
        w = lambda y: barenblatt(y, mf) ** (mf - 0.5)
        d = (w(x + h) - w(x - h)) / (2 * h)
        return theta / (2 * mf - 1) * d * d + 0.5 * x * x * v(x)

    assert fisher_I(g, m, 1, rule) == pytest.approx(quad_1d(dens, m), rel=1e-7)
    assert gradE_gnorm(g, m, rule) == pytest.approx(0.0, abs=1e-20)


@pytest.mark.parametrize("m,N", [(1, 1), (1, 2), (Fraction(3, 2), 1), (2, 2)])
def test_pushforward_keeps_mass(m, N):
    rule = default_rule(m, N)
    M = profile_mass_exact(m, N)
    x1 = MultiPoly.variable(0, N)
    for d in (Density("t", N, x1, 0.2), Density("d", N, MultiPoly.radius_squared(N) / 2, -0.1)):
        assert d.mass(rule) == pytest.approx(M, rel=1e-12)


def test_translation_entropy_closed_form():
    # translating the Gaussian by s raises E by s^2 M / 2 and the metric norm is s^2 M
    rule = default_rule(1, 1)
    M = profile_mass_exact(1, 1)
    g = Density("g", 1)
    for s in (0.1, 0.3):
        d = Density("t", 1, MultiPoly.variable(0, 1), s)
        assert entropy_E(d, 1, rule) - entropy_E(g, 1, rule) == pytest.approx(0.5 * s * s * M, rel=1e-10)
        assert gradE_gnorm(d, 1, rule) == pytest.approx(s * s * M, rel=1e-10)


@pytest.mark.parametrize("m", [1, Fraction(3, 2), 2])
@pytest.mark.parametrize("N", [1, 2])
def test_relation_holds_on_family(m, N):
    fam = make_family(m, N, samples=20, seed=3)
    assert len(fam) >= 20
    rule = default_rule(m, N)
    worst = max(relation_residual(d, m, N, rule) for d in fam)
    assert worst <= 1e-8
    assert sum(gradE_gnorm(d, m, rule) > 1e-10 for d in fam) >= len(fam) - 1


def test_relation_detects_wrong_theta(monkeypatch):
    # the identity pins theta: perturbing it must break the residual
    import dhspec.functionals as fn

    real = fn.derive_constants

    def wrong(m, N):
        p = real(m, N)
        return type(p)(**{**p.__dict__, "theta": p.theta * Fraction(11, 10)})

    monkeypatch.setattr(fn, "derive_constants", wrong)
    rule = default_rule(2, 1)
    d = Density("t", 1, MultiPoly.variable(0, 1) ** 3, 0.1)
    assert relation_residual(d, 2, 1, rule) > 1e-3


def test_family_is_deterministic_and_selectable():
    a = make_family(2, 2, samples=25, seed=7)
    b = make_family(2, 2, samples=25, seed=7)
    assert [d.name for d in a] == [d.name for d in b]
    assert len(a) >= 25
    only = make_family(2, 1, family="translation", samples=1)
    assert all(d.name.startswith(("ground", "translate")) for d in only)
    assert set(FAMILIES) >= {"translation", "dilation", "pushforward", "multiplier", "mixture", "all"}
    with pytest.raises(ValueError):
        make_family(2, 1, family="nonsense")


def test_multipliers():
    P = MultiPoly.from_text("x1^2", 1)
    q = polynomial_multiplier(P, 0.5, center=1.0)
    val, grad = q(np.array([[2.0]]))
    assert val[0] == pytest.approx(1 + 0.5 * 3.0)
    assert grad[0, 0] == pytest.approx(0.5 * 4.0)
    mix = exponential_mixture([1.0, 3.0], [[0.5], [-0.2]])
    rule = default_rule(1, 1)
    d = Density("mix", 1, multiplier=mix)
    assert d.mass(rule) == pytest.approx(profile_mass_exact(1, 1), rel=1e-12)


def test_pullback_rejects_folding_maps():
    rule = default_rule(2, 1)
    d = Density("fold", 1, MultiPoly.variable(0, 1) ** 2 / 2, -2.0)
    with pytest.raises(ValueError, match="orientation"):
        d.pullback(rule)


@pytest.mark.parametrize("m,N,idx", [
    (2, 1, EigenIndex(1, 1, 0)), (2, 1, EigenIndex(0, 1, 1)), (2, 1, EigenIndex(1, 1, 1)),
    (Fraction(3, 2), 2, EigenIndex(2, 1, 0)), (Fraction(3, 2), 1, EigenIndex(0, 1, 2)),
    (1, 1, EigenIndex(1, 1, 0)), (1, 2, EigenIndex(0, 1, 1)),
])
def test_second_variation_matches_quadratic_forms(m, N, idx):
    psi = eigenfunction(idx, m, N)
    out = hessian_spot_check(psi, m, N)
    for key in ("fisher", "gnorm", "entropy"):
        assert out[key]["relative_error"] < 3e-3, (key, out[key])


def test_relation_terms_fields():
    rule = default_rule(2, 1)
    t = relation_terms(Density("g", 1), 2, 1, rule)
    assert set(t) == {"E", "I", "gnorm", "lhs", "rhs", "residual"}
    assert t["rhs"] == pytest.approx(t["E"])


def test_profile_entropy_m2_closed_form():
    # int v_*^2 + x^2 v_* / 2 with v_* = (1 - x^2)/4 gives 1/15 + 1/30
    assert entropy_E(Density("g", 1), 2, default_rule(2, 1)) == pytest.approx(0.1, rel=1e-13)


def test_fisher_at_gaussian_profile_equals_NM():
    for N in (1, 2):
        rule = default_rule(1, N)
        assert fisher_I(Density("g", N), 1, N, rule) == pytest.approx(N * profile_mass_exact(1, N), rel=1e-12)


@pytest.mark.parametrize("m", [1, Fraction(3, 2), 2])
def test_profile_minimizes_along_dilations(m):
    rule = default_rule(m, 1)
    g = Density("g", 1)
    E0, I0 = entropy_E(g, m, rule), fisher_I(g, m, 1, rule)
    for s in (-0.2, -0.05, 0.05, 0.2):
        d = Density("d", 1, MultiPoly.radius_squared(1) / 2, s)
        assert entropy_E(d, m, rule) > E0
        assert fisher_I(d, m, 1, rule) > I0


def test_ground_state_is_unique_zero_of_metric_norm():
    for m, N in ((1, 1), (2, 2), (Fraction(3, 2), 1)):
        rule = default_rule(m, N)
        fam = make_family(m, N, samples=20)
        norms = [gradE_gnorm(d, m, rule) for d in fam]
        assert norms[0] <= 1e-10
        assert min(norms[1:]) > 1e-10


def test_dilated_barenblatt_relation_m2():
    rule = default_rule(2, 1)
    d = Density("d", 1, MultiPoly.radius_squared(1) / 2, 0.3)
    assert relation_residual(d, 2, 1, rule) <= 1e-8
