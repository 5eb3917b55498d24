import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from dhspec.profiles import (barenblatt, barenblatt_log_gradient, derive_constants, entropy_density,
                             params_for_mass, profile_mass, profile_mass_exact, rescale_map, scaling_AB,
                             sigma_for_mass, sphere_area)


def test_profile_closed_form_values():
    assert barenblatt(0.0, Fraction(3, 2)) == pytest.approx(1 / 36, rel=1e-15)
    assert barenblatt(0.0, 2) == pytest.approx(0.25, rel=1e-15)
    assert barenblatt(0.5, 2) == pytest.approx(0.25 * 0.75, rel=1e-15)
    assert barenblatt(1.2, 3) == 0.0
    assert barenblatt(1.0, 1) == pytest.approx(math.exp(-1.0), rel=1e-15)
    with pytest.raises(ValueError, match="m >= 1"):
        barenblatt(0.0, 0.5)


def test_constants_examples():
    p = derive_constants(Fraction(3, 2), 1)
    assert (p.alpha, p.gamma_sq, p.theta) == (Fraction(1, 5), Fraction(3, 40), Fraction(3, 2))
    q = derive_constants(1, 1)
    assert q.theta == 2 and q.alpha == Fraction(1, 4)
    r = derive_constants(2, 1)
    assert r.gamma_sq == Fraction(1, 18)
    assert r.gamma == pytest.approx(math.sqrt(1 / 18), rel=1e-15)
    with pytest.raises(ValueError):
        derive_constants(2, 0)


@pytest.mark.parametrize("m", [1, Fraction(5, 4), Fraction(3, 2), 2, 3])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_mass_matches_independent_integration(m, N):
    mf = float(m)
    R = 12.0 if mf == 1 else 1.0
    radial, _ = integrate.quad(lambda r: barenblatt(r, m) * r ** (N - 1), 0, R, limit=200)
    assert profile_mass_exact(m, N) == pytest.approx(sphere_area(N) * radial, rel=1e-9)
    assert profile_mass(m, N) == pytest.approx(profile_mass_exact(m, N), rel=1e-12)


def test_known_masses():
    assert profile_mass_exact(2, 1) == pytest.approx(1 / 3, rel=1e-14)
    assert profile_mass_exact(Fraction(3, 2), 1) == pytest.approx(4 / 135, rel=1e-14)
    assert profile_mass_exact(1, 1) == pytest.approx(math.exp(-0.5) * math.sqrt(2 * math.pi), rel=1e-14)


@given(st.floats(-0.95, 0.95), st.sampled_from([1.0, 1.25, 1.5, 2.0, 3.0]))
def test_log_gradient_matches_finite_difference(x, m):
    h = 1e-6
    fd = (math.log(barenblatt(x + h, m)) - math.log(barenblatt(x - h, m))) / (2 * h)
    assert barenblatt_log_gradient(np.array([[x]]), m)[0, 0] == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_profile_is_critical_point_of_entropy():
    # e'(v_*) + |x|^2/2 is constant on the support
    for m in (1.0, 1.5, 2.0, 3.0):
        x = np.linspace(-0.9, 0.9, 11)
        _, ep = entropy_density(barenblatt(x, m), m)
        pot = ep + 0.5 * x**2
        assert np.ptp(pot) < 1e-12


def test_entropy_density_domain():
    with pytest.raises(ValueError):
        entropy_density(np.array([0.0]), 1)
    with pytest.raises(ValueError):
        entropy_density(np.array([-1.0]), 2)


@pytest.mark.parametrize("m,N", [(2, 1), (Fraction(3, 2), 1), (2, 2), (1, 1), (1, 2)])
def test_self_similar_mass_is_conserved(m, N):
    M = 0.7
    p = params_for_mass(m, N, M)
    assert p.M == M
    mass_vstar = profile_mass_exact(m, N)
    for t in (0.5, 2.0, 10.0):
        t_hat = float(p.alpha) * math.log(t)
        # u(t, x) = B v_*(x / (A t^alpha)) / t^(N alpha); its x-integral is A^N B mass(v_*)
        rs = np.linspace(0.0, 1.0 if float(m) > 1 else 12.0, 20001)
        _, xs, us = rescale_map("inverse", t_hat, rs, barenblatt(rs, m), p)
        radial = integrate.trapezoid(us * xs ** (N - 1), xs)
        assert sphere_area(N) * radial == pytest.approx(M, rel=1e-6)
        assert p.A**N * p.B * mass_vstar == pytest.approx(M, rel=1e-10)


@settings(deadline=None)
@given(st.floats(0.1, 10.0), st.floats(-2.0, 2.0), st.floats(0.01, 3.0))
def test_rescale_round_trip(t, x, u):
    p = params_for_mass(2, 1, 1.0)
    th, xh, vh = rescale_map("forward", t, x, u, p)
    t2, x2, u2 = rescale_map("inverse", th, xh, vh, p)
    assert t2 == pytest.approx(t, rel=1e-12)
    assert float(x2) == pytest.approx(x, rel=1e-12, abs=1e-14)
    assert float(u2) == pytest.approx(u, rel=1e-12)


def test_rescale_errors():
    with pytest.raises(ValueError):
        rescale_map("forward", 1.0, 0.0, 1.0, derive_constants(2, 1))
    p = params_for_mass(2, 1, 1.0)
    with pytest.raises(ValueError):
        rescale_map("sideways", 1.0, 0.0, 1.0, p)
    with pytest.raises(ValueError):
        rescale_map("forward", -1.0, 0.0, 1.0, p)


def test_scaling_normalization():
    A, B = scaling_AB(2, 1, 0.5)
    assert B == pytest.approx(1.0)
    g = float(derive_constants(2, 1).gamma)
    assert scaling_AB(2, 1, g)[0] == pytest.approx(1.0)
    assert sigma_for_mass(2, 1, profile_mass_exact(2, 1) * A * B) == pytest.approx(0.5, rel=1e-9)
