"""Linearization at the singular steady state.

    A f = f'' + ((N−1)/ρ − ρ/2) f' + (pL^{p−1}/ρ² − 1/(p−1)) f

is self-adjoint in L²(a dρ) with a(ρ) = ρ^{N−1} e^{−ρ²/4}.  Its eigenpairs
are μ_j = −(β/2 + 1/(p−1) + j) and ϑ_j = ĉ_j ρ^β M(−j, β + N/2, ρ²/4).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .energy import WeightedQuadrature, gaussian_tail_radius, weighted_integral
from .io import atomic_csv
from .params import ParameterDomainError, ProblemParams, mu, regime
from .specfun import KummerPoly, lgamma
from .steady import fit_b, phi_alpha

JMAX_LIMIT = 12
MAX_ARGUMENT = 1e6


class DivergentProjection(ValueError):
    """The projection integrand is not integrable at the origin."""


@dataclass(frozen=True)
class Eigenfunction:
    """ϑ(ρ) = c ρ^β M(ρ²/4); call with nu = 0, 1, 2 for derivatives in ρ."""

    j: int
    beta: float
    c: float
    poly: KummerPoly

    def __call__(self, rho, nu: int = 0):
        r = np.asarray(rho, dtype=float)
        z = 0.25 * r * r
        M = self.poly(z)
        b = self.beta
        rb = r ** b
        if nu == 0:
            out = rb * M
        elif nu == 1:
            out = b * rb / r * M + 0.5 * r * rb * self.poly(z, 1)
        elif nu == 2:
            out = (b * (b - 1) * rb / (r * r) * M + 0.5 * (2 * b + 1) * rb * self.poly(z, 1)
                   + 0.25 * r * r * rb * self.poly(z, 2))
        else:
            raise ValueError("nu must be 0, 1 or 2")
        return self.c * out

    def zeros(self) -> np.ndarray:
        return 2.0 * np.sqrt(self.poly.roots())


@dataclass(frozen=True)
class SpectralFrame:
    params: ProblemParams
    jmax: int
    mus: tuple
    eigenfunctions: tuple = field(repr=False)

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def kummer_b(self) -> float:
        return self.params.beta + self.params.N / 2

    @property
    def c_hat(self) -> tuple:
        return tuple(e.c for e in self.eigenfunctions)

    def __getitem__(self, j) -> Eigenfunction:
        return self.eigenfunctions[j]

    def potential(self, rho):
        p = self.params.p
        return p * self.params.L ** (p - 1) / (np.asarray(rho) ** 2) - 1.0 / (p - 1)

    def gram(self) -> np.ndarray:
        """⟨ϑ_i, ϑ_j⟩ by Gauss-Laguerre with the ρ^{2β} factor folded into the weight."""
        q = WeightedQuadrature(self.params.N, 4 * self.jmax + 40, extra_power=2 * self.beta)
        t = 0.25 * q.nodes ** 2
        vals = np.array([e.c * e.poly(t) for e in self.eigenfunctions])
        return (vals * q.weights) @ vals.T


def norm_constant_closed_form(params: ProblemParams, j: int) -> float:
    """ĉ_j from ∫ M_j² t^{b−1} e^{−t} dt = j! Γ(b)² / Γ(b+j)."""
    b = params.beta + params.N / 2
    log_norm2 = ((params.N + 2 * params.beta - 1) * math.log(2.0) + math.lgamma(j + 1)
                 + 2 * lgamma(b) - lgamma(b + j))
    return math.exp(-0.5 * log_norm2)


def build_frame(params: ProblemParams, jmax: int = 5) -> SpectralFrame:
    """Analytic eigenpairs up to jmax, normalized by weighted quadrature."""
    if regime(params.p, params.pJL) != "super":
        raise ParameterDomainError(f"the spectral frame needs p > pJL = {params.pJL}")
    if not 0 <= jmax <= JMAX_LIMIT:
        raise ValueError(f"jmax must lie in [0, {JMAX_LIMIT}]")
    beta = params.require_beta()
    b = beta + params.N / 2
    if not b > 0:
        raise ParameterDomainError("beta + N/2 must be positive for integrability")
    q = WeightedQuadrature(params.N, 4 * jmax + 40, extra_power=2 * beta)
    t = 0.25 * q.nodes ** 2
    efs = []
    for j in range(jmax + 1):
        poly = KummerPoly.build(j, b)
        norm2 = float(np.dot(q.weights, poly(t) ** 2))
        efs.append(Eigenfunction(j, beta, 1.0 / math.sqrt(norm2), poly))
    return SpectralFrame(params, jmax, tuple(mu(params, j) for j in range(jmax + 1)), tuple(efs))


def apply_A(frame: SpectralFrame, f, rho):
    """Pointwise A f; ``f(rho, nu)`` must return the nu-th radial derivative."""
    r = np.asarray(rho, dtype=float)
    if np.any(r <= 0):
        raise ValueError("A is evaluated at positive radii only")
    N = frame.params.N
    return f(r, 2) + ((N - 1) / r - 0.5 * r) * f(r, 1) + frame.potential(r) * f(r, 0)


def _log_weight(N, r):
    return (N - 1) * np.log(r) - 0.25 * r * r


def discretize_A(frame: SpectralFrame, rho_min: float = 0.05, rho_max: float = 25.0, n: int = 4000,
                 bc: str = "dirichlet", count: int = 3) -> np.ndarray:
    """Leading eigenvalues of the conservative three-point discretization of A.

    (1/a)(a f')' is discretized with face weights a_{i±1/2} on a uniform grid
    of ``n`` interior nodes, homogeneous Dirichlet values at both ends, and
    symmetrized by the diagonal similarity √a_i.  Returns the ``count``
    largest eigenvalues in decreasing order.
    """
    if bc != "dirichlet":
        raise ValueError("only homogeneous Dirichlet ends are supported")
    if not 0 < rho_min < rho_max:
        raise ValueError("need 0 < rho_min < rho_max")
    N = frame.params.N
    h = (rho_max - rho_min) / (n + 1)
    r = rho_min + h * np.arange(1, n + 1)
    faces = rho_min + h * (np.arange(n + 1) + 0.5)
    la = _log_weight(N, r)
    lf = _log_weight(N, faces)
    diag = -(np.exp(lf[1:] - la) + np.exp(lf[:-1] - la)) / h ** 2 + frame.potential(r)
    off = np.exp(lf[1:-1] - 0.5 * (la[:-1] + la[1:])) / h ** 2
    vals = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(n - count, n - 1))
    return vals[::-1]


def inner(frame: SpectralFrame, f, g, head=None, rel_tol: float = 1e-9, abs_tol: float = 0.0) -> float:
    """⟨f, g⟩ with the singular-head handling of the energy quadrature."""
    return weighted_integral(lambda x: np.asarray(f(x)) * np.asarray(g(x)), frame.params.N, head=head,
                             rel_tol=rel_tol, abs_tol=abs_tol)


@dataclass(frozen=True)
class Projection:
    xi0: float
    xi1: float
    tail_norm: float
    norm: float


def project_coeffs(frame: SpectralFrame, w, *, w_power: float = 0.0, w_coef: float | None = None,
                   rel_tol: float = 1e-9) -> Projection:
    """(ξ₀, ξ₁, ‖w − ξ₀ϑ₀ − ξ₁ϑ₁‖) in L²(a dρ).

    ``w ~ w_coef ρ^{w_power}`` near the origin is used for the closed-form
    head on [0, 10⁻³]; when ``w_coef`` is None it is read off w(10⁻³).
    ``rel_tol`` is the panel-refinement tolerance; differences of nearly equal
    profiles carry interpolation noise near 1e-10 relative.
    """
    N, beta = frame.params.N, frame.beta
    if w_power + beta + N <= 0:
        raise DivergentProjection("w * theta_j is not integrable at the origin")
    if 2 * w_power + N <= 0:
        raise DivergentProjection("w is not square integrable at the origin")
    eps = 1e-3
    if w_coef is None:
        w_coef = float(w(np.array([eps]))[0]) * eps ** (-w_power)
    norm2 = inner(frame, w, w, head=(w_coef ** 2, 2 * w_power), rel_tol=rel_tol)
    # |ξ_j| ≤ ‖w‖, so ‖w‖ sets the absolute accuracy scale of the coefficients
    floor = rel_tol * math.sqrt(max(norm2, 0.0))
    xs = []
    for j in (0, 1):
        e = frame[j]
        xs.append(inner(frame, w, e, head=(w_coef * e.c, w_power + beta), rel_tol=rel_tol, abs_tol=floor))
    tail2 = norm2 - xs[0] ** 2 - xs[1] ** 2
    return Projection(xs[0], xs[1], math.sqrt(max(tail2, 0.0)), math.sqrt(max(norm2, 0.0)))


def rescaled_steady(params: ProblemParams, alpha: float, rho, s: float):
    """ψ_α(ρ, s) = e^{−s/(p−1)} φ_α(e^{−s/2} ρ)."""
    r = np.asarray(rho, dtype=float)
    x = math.exp(-0.5 * s) * r
    if np.any(x > MAX_ARGUMENT):
        raise ValueError("e^{-s/2} rho exceeds the supported range of phi_alpha")
    return math.exp(-s / (params.p - 1)) * phi_alpha(params, alpha, x)


@dataclass
class RateStudy:
    s: np.ndarray
    xi0: np.ndarray
    xi1: np.ndarray
    tail_norm: np.ndarray
    b: float
    slope: float
    intercept: float

    @property
    def ratio(self) -> np.ndarray:
        return np.maximum(np.abs(self.xi1), self.tail_norm) / self.xi0

    def predicted_log_xi0(self, frame: SpectralFrame) -> np.ndarray:
        return math.log(self.b / frame[0].c) + frame.mus[0] * self.s


def rate_study(frame: SpectralFrame, alpha: float = 1.0, s_values=None) -> RateStudy:
    """Project φ∞ − ψ_α(·, s) on the leading eigenfunctions for a range of s."""
    params = frame.params
    if s_values is None:
        s_values = np.linspace(-8.0, -4.0, 17)
    s_values = np.asarray(s_values, dtype=float)
    L, m = params.L, params.m
    # make sure the cached φ₁ covers the largest argument once, up front
    rmax = gaussian_tail_radius(params.N) * math.exp(-0.5 * s_values.min()) * alpha ** ((params.p - 1) / 2)
    phi_alpha(params, 1.0, rmax)
    rows = []
    for s in s_values:
        w = (lambda s_: lambda x: params.phi_inf(x) - rescaled_steady(params, alpha, x, s_))(s)
        pr = project_coeffs(frame, w, w_power=-m, w_coef=L)
        rows.append((pr.xi0, pr.xi1, pr.tail_norm))
    xi = np.array(rows)
    slope, intercept = np.polyfit(s_values, np.log(xi[:, 0]), 1)
    return RateStudy(s_values, xi[:, 0], xi[:, 1], xi[:, 2], fit_b(params, alpha), float(slope), float(intercept))


RATE_COLUMNS = ("s", "xi0", "xi1", "tail_norm", "log_xi0", "predicted_log_xi0")


def write_rate_csv(path, frame: SpectralFrame, study: RateStudy) -> None:
    pred = study.predicted_log_xi0(frame)
    rows = [(s, a, b, t, math.log(a), q) for s, a, b, t, q in
            zip(study.s, study.xi0, study.xi1, study.tail_norm, pred)]
    atomic_csv(path, RATE_COLUMNS, rows)
