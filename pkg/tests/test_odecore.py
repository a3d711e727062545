import numpy as np
import pytest

from fujita_lab import kernels
from fujita_lab.odecore import Frame, RadialIVP, Termination, integrate, origin_series
from fujita_lab.params import ParameterDomainError


def test_kappa_is_steady(p12):
    sol = integrate(RadialIVP(p12, Frame.selfsimilar, p12.kappa), 10.0)
    r = np.linspace(0, 10, 101)
    np.testing.assert_allclose(sol(r), p12.kappa, atol=1e-9)
    assert sol.termination is Termination.reached_rmax


def test_zero_data_stays_zero(p12):
    sol = integrate(RadialIVP(p12, Frame.selfsimilar, 0.0), 40.0)
    assert np.max(np.abs(sol(np.linspace(0, 40, 50)))) == 0.0


def test_hits_zero_anchor(p12):
    sol = integrate(RadialIVP(p12, Frame.selfsimilar, 2 * p12.kappa), 40.0)
    assert sol.termination is Termination.hit_zero
    # regression anchor from the first recorded run
    assert sol.max_radius == pytest.approx(8.69050262611238, rel=1e-8)
    assert abs(sol(sol.max_radius)) < 1e-12


def test_origin_series_kappa(p12):
    assert origin_series(p12.kappa, p12, Frame.selfsimilar).coef[1] == pytest.approx(0.0, abs=1e-15)


def test_origin_series_physical(p12):
    poly = origin_series(1.0, p12, Frame.physical)
    assert poly.coef[0] == 1.0
    assert poly.coef[1] == pytest.approx(-1 / 24)


def test_origin_series_zero(p12):
    assert np.all(origin_series(0.0, p12, Frame.physical).coef == 0)


def test_origin_series_negative_rejected(p12):
    with pytest.raises(ParameterDomainError):
        origin_series(-1.0, p12, Frame.physical)


@pytest.mark.parametrize("frame", list(Frame))
@pytest.mark.parametrize("a", [0.3, 1.0, 2.5])
def test_solution_satisfies_ode(p12, frame, a):
    ivp = RadialIVP(p12, frame, a)
    sol = integrate(ivp, 6.0)
    r = np.linspace(0.5, min(5.5, sol.max_radius * 0.9), 40)
    h = 1e-4
    d2 = (sol(r + h) - 2 * sol(r) + sol(r - h)) / h ** 2
    np.testing.assert_allclose(d2, ivp.rhs_second(r, sol(r), sol(r, 1)), rtol=1e-4, atol=1e-5)


def test_physical_near_origin(p12):
    sol = integrate(RadialIVP(p12, Frame.physical, 1.0), 5.0)
    r = 0.05
    assert sol(r) == pytest.approx(origin_series(1.0, p12, Frame.physical)(r * r), abs=1e-10)


@pytest.mark.skipif(kernels.numba_variant is None, reason="numba not installed")
def test_numba_and_numpy_kernels_agree(p12):
    ivp = RadialIVP(p12, Frame.selfsimilar, 1.7)
    w0, dw0 = ivp.initial_state()
    args = (12.0, 5.0, 1.0, ivp.start_radius, w0, dw0, 20.0, 1e-10, 1e-12, 1e-6, 1e8, 1e-14, 100000)
    a = kernels.numpy_variant.dopri(*args)
    b = kernels.numba_variant.dopri(*args)
    assert a[0] == b[0] and a[3] == b[3]
    np.testing.assert_allclose(a[1][: a[0] + 1], b[1][: b[0] + 1], rtol=1e-13)


@pytest.mark.parametrize("frame,rmax", [(Frame.physical, 20.0), (Frame.selfsimilar, 8.0)])
def test_singular_state_reproduced(p12, frame, rmax):
    r0 = 0.5
    start = (p12.phi_inf(r0), -p12.m * p12.phi_inf(r0) / r0)
    ivp = RadialIVP(p12, frame, start_radius=r0, start_state=start)
    sol = integrate(ivp, rmax, rtol=1e-12, atol=1e-14)
    r = np.linspace(r0, rmax, 400)
    np.testing.assert_allclose(sol(r), p12.phi_inf(r), rtol=1e-8)
