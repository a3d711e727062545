import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fujita_lab import energy, make_params
from fujita_lab.params import ParameterDomainError


def test_energy_kappa_closed_form(p12):
    assert energy.energy_kappa(p12) == pytest.approx(10240.0, rel=1e-12)


def test_energy_kappa_by_quadrature(p12):
    k = p12.kappa
    e = energy.energy(lambda x: np.full_like(x, k), lambda x: np.zeros_like(x), p12)
    assert e == pytest.approx(10240.0, rel=1e-10)


def test_energy_zero(p12):
    assert energy.energy(np.zeros_like, np.zeros_like, p12) == 0.0


@pytest.mark.parametrize("N,power", [(3, 0.0), (12, 0.0), (12, 2.5), (6, -1.5)])
def test_weight_moment_against_mpmath(N, power):
    ref = mpmath.quad(lambda r: r ** (N - 1 + power) * mpmath.exp(-r * r / 4), [0, mpmath.inf])
    assert energy.weight_moment(N, power) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("k", [0, 1, 2, 5])
def test_gauss_laguerre_polynomial_moments(k):
    q = energy.WeightedQuadrature(12, 60)
    got = q.integrate(lambda r: r ** (2 * k))
    assert got == pytest.approx(energy.weight_moment(12, 2 * k), rel=1e-12)


def test_ratio_value(p12):
    F = energy.energy_ratio_F(p12)
    ref = mpmath.gamma(4.5) / mpmath.gamma(6) * mpmath.mpf(4.75) ** 1.5
    assert F == pytest.approx(float(ref), rel=1e-13)
    assert F == pytest.approx(1.003468, abs=1e-5)


def test_ratio_two_paths(p12):
    assert energy.energy_ratio_quadrature(p12) == pytest.approx(energy.energy_ratio_F(p12), rel=1e-8)


def test_singular_energy_two_paths():
    P = make_params(12, 3.0)
    g, q = energy.energy_singular(P, "gamma"), energy.energy_singular(P, "quadrature")
    assert g > 0 and q == pytest.approx(g, rel=1e-8)


def test_ratio_diverges_at_pS():
    vals = [energy.energy_ratio_F(make_params(12, 1.4 + d)) for d in (1e-2, 1e-3, 1e-4)]
    assert vals[0] < vals[1] < vals[2] and vals[2] > 100


def test_ratio_rejected_at_pS():
    with pytest.raises(ParameterDomainError):
        energy.energy_ratio_F(make_params(12, 1.4))


def test_ratio_tends_to_one():
    assert abs(energy.energy_ratio_F(make_params(12, 50.0)) - 1) < 0.02
    assert abs(energy.energy_ratio_F(make_params(12, 1e4)) - 1) < 1e-3


@settings(max_examples=50, deadline=None)
@given(st.floats(1.45, 40.0), st.floats(1.001, 1.5))
def test_ratio_decreasing(p1, factor):
    p2 = p1 * factor
    F1, F2 = (energy.energy_ratio_F(make_params(12, p)) for p in (p1, p2))
    assert F1 > F2 > 1


def test_f_xi_domain():
    with pytest.raises(ParameterDomainError):
        energy.f_xi(6.5, 12)


def test_member_energy_between(p6, member_a2):
    e = energy.steady_state_energy(member_a2, p6)
    assert energy.energy_kappa(p6) < e < energy.energy_singular(p6)


def test_steady_energy_identity(p6, member_a2):
    # for a steady state the quadratic part integrates by parts to ½∫w^{p+1}
    p = p6.p
    e = energy.steady_state_energy(member_a2, p6)
    pot = energy.potential_integral(member_a2.value, p6)
    assert e == pytest.approx((0.5 - 1 / (p + 1)) * pot, rel=1e-9)


def test_probe_report(p6, member_a2):
    rep = energy.energy_condition_probe(p6, [member_a2])
    assert rep.all_between and len(rep.entries) == 1


def test_probe_empty_atlas():
    P = make_params(13, 2.95)
    assert float(P.pJL) < 2.95 < float(P.pL)
    rep = energy.energy_condition_probe(P, [])
    assert rep.entries == [] and rep.all_between
    assert rep.E_singular > rep.E_kappa


def test_grid_energy_constant(p12):
    r = np.linspace(0, 40, 4001)
    assert energy.grid_energy(r, np.full_like(r, p12.kappa), p12) == pytest.approx(10240.0, rel=1e-9)


def test_divergent_head_rejected(p12):
    with pytest.raises(ParameterDomainError):
        energy.weighted_integral(lambda r: r ** -13.0, 12, head=(1.0, -13.0))
