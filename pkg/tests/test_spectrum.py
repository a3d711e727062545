import numpy as np
import pytest

from fujita_lab import make_params, spectrum, steady
from fujita_lab.params import ParameterDomainError


def test_eigenvalues(frame12):
    np.testing.assert_allclose(frame12.mus[:3], [1.690983, 0.690983, -0.309017], atol=1e-6)


def test_unit_gap(frame12):
    np.testing.assert_allclose(np.diff(frame12.mus), -1.0, atol=1e-14)


def test_gram_identity(frame12):
    np.testing.assert_allclose(frame12.gram(), np.eye(6), atol=1e-8)


def test_c0_closed_form(frame12, p12):
    assert frame12.c_hat[0] == pytest.approx(spectrum.norm_constant_closed_form(p12, 0), rel=1e-12)


@pytest.mark.parametrize("j", [1, 3, 5])
def test_cj_closed_form(frame12, p12, j):
    assert frame12.c_hat[j] == pytest.approx(spectrum.norm_constant_closed_form(p12, j), rel=1e-10)


def test_theta0_is_power(frame12):
    r = np.geomspace(1e-3, 10, 7)
    np.testing.assert_allclose(frame12[0](r), frame12.c_hat[0] * r ** frame12.beta, rtol=1e-15)


@pytest.mark.parametrize("j", range(6))
def test_zero_count(frame12, j):
    assert frame12[j].zeros().size == j


@pytest.mark.parametrize("j", range(4))
def test_eigen_relation(frame12, j):
    r = np.linspace(0.2, 12, 40)
    lhs = spectrum.apply_A(frame12, frame12[j], r)
    np.testing.assert_allclose(lhs, frame12.mus[j] * frame12[j](r), rtol=1e-9, atol=1e-12)


def test_power_law_is_eigenfunction(frame12):
    b = frame12.beta
    f = lambda r, nu: (r ** b, b * r ** (b - 1), b * (b - 1) * r ** (b - 2))[nu]  # noqa: E731
    r = np.geomspace(0.01, 50, 9)
    np.testing.assert_allclose(spectrum.apply_A(frame12, f, r), frame12.mus[0] * r ** b, rtol=1e-9)


def test_constant_is_potential(frame12, p12):
    c = 1.7
    f = lambda r, nu: np.full_like(r, c) if nu == 0 else np.zeros_like(r)  # noqa: E731
    r = np.linspace(0.5, 5, 5)
    expected = c * (p12.p * p12.L ** (p12.p - 1) / r ** 2 - 1 / (p12.p - 1))
    np.testing.assert_allclose(spectrum.apply_A(frame12, f, r), expected, rtol=1e-14)


def test_discrete_operator(frame12):
    vals = spectrum.discretize_A(frame12, n=4000)
    assert abs(vals[0] - frame12.mus[0]) < 1e-3
    assert vals[0] - vals[1] == pytest.approx(1.0, abs=5e-3)


def test_discrete_second_order(frame12):
    errs = [spectrum.discretize_A(frame12, n=n, count=1)[0] for n in (2000, 4000, 8000)]
    # successive differences shrink by ~4 for a second-order scheme
    assert (errs[0] - errs[1]) / (errs[1] - errs[2]) > 3.5


def test_frame_needs_p_above_pJL():
    with pytest.raises(ParameterDomainError):
        spectrum.build_frame(make_params(12, 3.0))


def test_project_theta0(frame12):
    pr = spectrum.project_coeffs(frame12, frame12[0], w_power=frame12.beta, w_coef=frame12.c_hat[0])
    assert pr.xi0 == pytest.approx(1.0, abs=1e-9)
    assert abs(pr.xi1) < 1e-9 and pr.tail_norm < 1e-4


def test_project_combination(frame12):
    w = lambda r: 2 * frame12[0](r) + 3 * frame12[1](r)  # noqa: E731
    pr = spectrum.project_coeffs(frame12, w, w_power=frame12.beta)
    assert pr.xi0 == pytest.approx(2.0, abs=1e-8)
    assert pr.xi1 == pytest.approx(3.0, abs=1e-8)


def test_rescaled_steady_at_zero(p12):
    r = np.linspace(0, 10, 11)
    np.testing.assert_allclose(spectrum.rescaled_steady(p12, 1.0, r, 0.0), steady.phi_alpha(p12, 1.0, r), rtol=1e-15)


def test_rescaled_steady_solves_evolution(p12):
    r = np.linspace(0.5, 8, 16)
    s, ds, h = -1.0, 1e-4, 1e-4
    psi = lambda rr, ss: spectrum.rescaled_steady(p12, 1.0, rr, ss)  # noqa: E731
    dt = (psi(r, s + ds) - psi(r, s - ds)) / (2 * ds)
    v = psi(r, s)
    d1 = (psi(r + h, s) - psi(r - h, s)) / (2 * h)
    d2 = (psi(r + h, s) - 2 * v + psi(r - h, s)) / h ** 2
    rhs = d2 + ((p12.N - 1) / r - r / 2) * d1 - v / (p12.p - 1) + v ** p12.p
    np.testing.assert_allclose(dt, rhs, atol=1e-6)


def test_rescaled_steady_approaches_singular(p12):
    r = np.array([0.5, 1.0, 3.0])
    errs = [np.max(np.abs(spectrum.rescaled_steady(p12, 1.0, r, s) / p12.phi_inf(r) - 1)) for s in (-4, -8, -12)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-3


def test_rate_study(frame12, tmp_path):
    study = spectrum.rate_study(frame12, 1.0, np.linspace(-8, -4, 9))
    assert study.slope == pytest.approx(frame12.mus[0], rel=0.02)
    np.testing.assert_allclose(np.log(study.xi0), study.predicted_log_xi0(frame12), atol=0.1)
    assert np.all(np.diff(study.ratio) > 0) and study.ratio[-1] < 0.05
    spectrum.write_rate_csv(tmp_path / "r.csv", frame12, study)
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 10
