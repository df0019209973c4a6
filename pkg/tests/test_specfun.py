import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from blowup_lab.specfun import (BesselEval, RegimeError, bessel_asym_leading, bessel_i, bessel_ik,
                                bessel_k, gamma_fn, log_bessel_i, log_bessel_k)

mp.mp.dps = 40


def series_i(nu, x, terms=30):
    return sum((x / 2) ** (2 * k + nu) / (math.factorial(k) * math.gamma(k + nu + 1)) for k in range(terms))


def quad_k(nu, x):
    def integrand(t):
        # cosh(nu t) in logs so large t cannot overflow
        log_cosh = nu * t + math.log1p(math.exp(-2 * nu * t)) - math.log(2)
        return math.exp(-x * math.cosh(t) + log_cosh) if t < 50 else 0.0

    val, _ = quad(integrand, 0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return val


def test_gamma_values():
    assert gamma_fn(1) == 1
    assert gamma_fn(5) == pytest.approx(24, rel=1e-15)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    # integral definition
    val, _ = quad(lambda t: t ** -0.5 * math.exp(-t), 0, np.inf)
    assert gamma_fn(0.5) == pytest.approx(val, rel=1e-9)


@pytest.mark.parametrize("x", [0, -1, -7])
def test_gamma_poles(x):
    with pytest.raises(ValueError):
        gamma_fn(x)


@settings(max_examples=200, deadline=None)
@given(st.floats(-30, 30).filter(lambda x: abs(x - round(x)) > 1e-6 or x > 0.5))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-12)


def test_half_order_closed_forms():
    assert bessel_i(0.5, 1.0) == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1), rel=1e-13)
    assert bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-13)
    assert bessel_k(0.5, 10.0) == pytest.approx(math.sqrt(math.pi / 20) * math.exp(-10), rel=1e-13)


def test_small_argument_limit():
    assert bessel_i(1.0, 1e-300) == pytest.approx(0.5e-300, rel=1e-12)
    assert bessel_i(1.0, 1e-8) == pytest.approx(0.5e-8, rel=1e-12)


def test_series_oracle():
    assert bessel_i(1.5, 2.0) == pytest.approx(series_i(1.5, 2.0), rel=1e-13)


@pytest.mark.parametrize("nu", [0.3, 1.0, 2.0, 2.5, 3.7])
@pytest.mark.parametrize("x", [0.05, 1.0, 4.0, 20.0])
def test_k_against_quadrature(nu, x):
    assert bessel_k(nu, x) == pytest.approx(quad_k(nu, x), rel=1e-10)


@pytest.mark.parametrize("nu", [0.01, 0.5, 1.0, 1.0 + 1e-6, 2.0, 4.5, 13.0, 30.0])
@pytest.mark.parametrize("x", [1e-6, 0.3, 1.99, 2.01, 9.0, 55.0, 300.0, 699.0])
def test_against_mpmath(nu, x):
    ie, ke = float(mp.besseli(nu, x)), float(mp.besselk(nu, x))
    assert bessel_i(nu, x) == pytest.approx(ie, rel=1e-10)
    if ke > 1e-300 and math.isfinite(ke):
        assert bessel_k(nu, x) == pytest.approx(ke, rel=1e-10)


@pytest.mark.parametrize("nu,x", [(0.5, 5000.0), (1.0, 1e4), (2.5, 800.0), (3.0, 1e-250),
                                  (200.0, 1.0), (1000.0, 780.0)])
def test_log_variants_beyond_range(nu, x):
    assert log_bessel_i(nu, x) == pytest.approx(float(mp.log(mp.besseli(nu, x))), rel=1e-12)
    assert log_bessel_k(nu, x) == pytest.approx(float(mp.log(mp.besselk(nu, x))), rel=1e-12)


def test_overflow_reported():
    with pytest.raises(OverflowError):
        bessel_i(1.0, 800.0)


def test_vectorised():
    x = np.array([0.5, 1.0, 2.0])
    assert bessel_i(1.0, x).shape == (3,)
    assert np.all(bessel_k(1.0, x) > 0)


def grid(n_nu=20, n_x=20):
    nus = np.linspace(0.15, 3.0, n_nu)
    xs = np.geomspace(0.1, 50.0, n_x)
    return [(float(a), float(b)) for a in nus for b in xs]


def test_wronskian_on_grid():
    worst = 0.0
    for nu, x in grid():
        i, k = bessel_i(nu, x), bessel_k(nu, x)
        di = 0.5 * (bessel_i(nu - 1, x) + bessel_i(nu + 1, x))
        dk = -0.5 * (bessel_k(nu - 1, x) + bessel_k(nu + 1, x))
        worst = max(worst, abs((di * k - i * dk) * x - 1.0))
    assert worst <= 1e-8


def test_recurrence_on_grid():
    for nu, x in grid():
        lhs = bessel_i(nu - 1, x) - bessel_i(nu + 1, x)
        assert lhs == pytest.approx(2 * nu / x * bessel_i(nu, x), rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(0.01, 5), x=st.floats(0.05, 100))
def test_monotone_in_x(nu, x):
    x2 = x * 1.01
    assert bessel_i(nu, x2) > bessel_i(nu, x)
    assert bessel_k(nu, x2) < bessel_k(nu, x)


def test_derivatives_from_ik():
    i, k, di, dk = bessel_ik(1.3, 3.0)
    assert di == pytest.approx(float(mp.diff(lambda z: mp.besseli(1.3, z), 3.0)), rel=1e-12)
    assert dk == pytest.approx(float(mp.diff(lambda z: mp.besselk(1.3, z), 3.0)), rel=1e-12)


def test_asymptotic_leading_terms():
    first = bessel_asym_leading("first", 0.5, 50.0)
    assert first == pytest.approx(math.exp(50) / math.sqrt(100 * math.pi), rel=1e-14)
    assert first / bessel_i(0.5, 50.0) == pytest.approx(1.0, abs=0.01)
    second = bessel_asym_leading("second", 0.5, 50.0)
    assert second == pytest.approx(bessel_k(0.5, 50.0), rel=1e-13)
    assert 0.99 <= bessel_asym_leading("first", 1.0, 100.0) / bessel_i(1.0, 100.0) <= 1.01
    with pytest.raises(RegimeError):
        bessel_asym_leading("first", 2.0, 39.0)


def test_bessel_eval_record():
    e = BesselEval.at(0.5, 1.0)
    assert e.value_i > 0 and e.value_k > 0
    assert e.log_i == pytest.approx(math.log(e.value_i))
