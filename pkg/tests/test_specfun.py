import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fujita_lab.specfun import KummerPoly, PoleError, digamma, gamma, lgamma


@pytest.mark.parametrize("x,expected", [
    (0.5, math.sqrt(math.pi)),
    (6.0, 120.0),
    (4.5, 3.5 * 2.5 * 1.5 * 0.5 * math.sqrt(math.pi)),
])
def test_gamma_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-13)


def test_gamma_pole():
    with pytest.raises(PoleError):
        gamma(-2.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 150.0))
def test_lgamma_against_mpmath(x):
    assert lgamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("z,expected", [(1.0, -0.5772156649015329), (2.0, 1 - 0.5772156649015329)])
def test_digamma_values(z, expected):
    assert digamma(z) == pytest.approx(expected, abs=1e-13)


def test_digamma_log_bound():
    assert digamma(3.7) < math.log(3.7) - 1 / 7.4
    assert digamma(3.7) == pytest.approx(float(mpmath.digamma(3.7)), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 80.0))
def test_digamma_recurrence(z):
    assert digamma(z + 1) == pytest.approx(digamma(z) + 1 / z, rel=1e-11, abs=1e-12)


def test_kummer_degree_zero():
    assert KummerPoly.build(0, 3.3)(7.3) == 1.0


def test_kummer_degree_one_root():
    b = 2.7
    assert KummerPoly.build(1, b)(b) == pytest.approx(0.0, abs=1e-15)


def test_kummer_degree_two():
    assert KummerPoly.build(2, 2.0)(1.0) == pytest.approx(1 / 6, rel=1e-14)


@pytest.mark.parametrize("j", [1, 3, 6])
@pytest.mark.parametrize("b", [0.4, 2.5, 7.0])
def test_kummer_matches_mpmath(j, b):
    P = KummerPoly.build(j, b)
    z = np.linspace(0, 20, 9)
    mpmath.mp.dps = 40
    ref = [float(sum(mpmath.rf(-j, k) / mpmath.rf(b, k) * mpmath.mpf(zz) ** k / mpmath.factorial(k)
                     for k in range(j + 1))) for zz in z]
    np.testing.assert_allclose(P(z), ref, rtol=1e-11, atol=1e-11)


@pytest.mark.parametrize("j", [1, 4, 9])
def test_kummer_roots_count(j):
    P = KummerPoly.build(j, 1.3)
    r = P.roots()
    assert r.size == j
    # residual relative to the local slope, i.e. a root located to ~1e-10
    assert np.all(np.abs(P(r)) <= 1e-10 * np.abs(P(r, 1)))


def test_kummer_derivative():
    P = KummerPoly.build(4, 1.7)
    z, h = 2.3, 1e-5
    assert P(z, 1) == pytest.approx((P(z + h) - P(z - h)) / (2 * h), rel=1e-8)


def test_kummer_rejects_nonpositive_b():
    with pytest.raises(ValueError):
        KummerPoly.build(2, -0.5)
