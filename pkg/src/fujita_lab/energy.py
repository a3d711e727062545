"""Gaussian-weighted energy of radial profiles of the rescaled equation.

All energies use the radial normalization

    E(w) = ∫_0^∞ (½ w'² + w²/(2(p−1)) − w^{p+1}/(p+1)) ρ^{N−1} e^{−ρ²/4} dρ,

i.e. the surface area of the unit sphere is dropped everywhere.  It cancels
in every ratio and comparison made here.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .params import ParameterDomainError, ProblemParams, regime
from .specfun import gamma

DEFAULT_ORDER = 200
HEAD_EPS = 1e-3


class EnergyDivergenceError(RuntimeError):
    """Quadrature refinement did not converge."""


def weight_moment(N: int, power: float = 0.0) -> float:
    """∫_0^∞ ρ^power ρ^{N−1} e^{−ρ²/4} dρ = 2^{N+power−1} Γ((N+power)/2)."""
    if N + power <= 0:
        raise ParameterDomainError("weighted moment diverges at the origin")
    return 2.0 ** (N + power - 1) * gamma((N + power) / 2)


@functools.lru_cache(maxsize=64)
def _genlaguerre(order: int, alpha: float):
    t, w = special.roots_genlaguerre(order, alpha)
    return t, w


@dataclass(frozen=True)
class WeightedQuadrature:
    """Gauss rule for ∫_0^∞ h(ρ) ρ^s ρ^{N−1} e^{−ρ²/4} dρ.

    With t = ρ²/4 the weight becomes 2^{N+s−1} t^{(N+s)/2−1} e^{−t}, so the
    rule is generalized Gauss-Laguerre in t and integrates polynomials in ρ²
    exactly up to degree ``order − 1`` in t.
    """

    N: int
    order: int = DEFAULT_ORDER
    extra_power: float = 0.0
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha = (self.N + self.extra_power) / 2 - 1
        if alpha <= -1:
            raise ParameterDomainError("weight is not integrable at the origin")
        t, w = _genlaguerre(self.order, float(alpha))
        object.__setattr__(self, "nodes", 2.0 * np.sqrt(t))
        object.__setattr__(self, "weights", w * 2.0 ** (self.N + self.extra_power - 1))

    def integrate(self, h) -> float:
        vals = np.asarray(h(self.nodes), dtype=float)
        keep = self.weights > 0
        return float(np.dot(self.weights[keep], vals[keep]))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panel_edges(lo: float, hi: float, split: float, width: float) -> np.ndarray:
    edges = [lo]
    if lo < split:
        edges.extend(np.geomspace(lo, split, max(2, int(math.ceil(math.log2(split / lo)))) + 1)[1:])
    x = max(split, lo)
    while x < hi - 1e-12:
        x = min(x + width, hi)
        edges.append(x)
    return np.unique(np.asarray(edges))


def _composite(h, edges) -> float:
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    vals = np.asarray(h(x), dtype=float).reshape(a.size, _GL_X.size)
    return float(np.sum(half * (vals @ _GL_W)))


def gaussian_tail_radius(N: int, power: float = 0.0) -> float:
    """Radius beyond which ρ^{N−1+power} e^{−ρ²/4} is below e^{−46} of its peak."""
    q = max(N - 1 + power, 0.0)
    return 2.0 * math.sqrt(q / 2 + 46.0) + 2.0


def weighted_integral(h, N: int, *, head=None, eps: float = HEAD_EPS, split: float = 1.0,
                      upper: float | None = None, rel_tol: float = 1e-11, abs_tol: float = 0.0,
                      gaussian: bool = True) -> float:
    """∫_0^∞ h(ρ) ρ^{N−1} e^{−ρ²/4} dρ by composite Gauss-Legendre panels.

    ``head = (c, q)`` declares h(ρ) ≈ c ρ^q on [0, eps]; that piece is then
    integrated in closed form and the panels start at eps.  Panels are
    geometric below ``split`` and of width ≤ 1/2 above.  The panel count is
    doubled until two successive results agree to ``rel_tol`` (or ``abs_tol``).
    """
    if upper is None:
        upper = gaussian_tail_radius(N)

    def integrand(x):
        a = x ** (N - 1) * (np.exp(-0.25 * x * x) if gaussian else 1.0)
        return np.asarray(h(x), dtype=float) * a

    head_val = 0.0
    lo = 0.0
    if head is not None:
        c, q = head
        s = q + N - 1
        if s <= -1:
            raise ParameterDomainError(f"integrand ~ rho^{s} is not integrable at the origin")
        if gaussian:
            head_val = c * 2.0 ** s * special.gamma((s + 1) / 2) * special.gammainc((s + 1) / 2, eps * eps / 4)
        else:
            head_val = c * eps ** (s + 1) / (s + 1)
        lo = eps
    start = max(lo, 1e-3) if lo > 0 else 0.0
    if lo == 0.0:
        edges = np.concatenate([[0.0], _panel_edges(1e-3, upper, split, 0.5)])
    else:
        edges = _panel_edges(start, upper, split, 0.5)
    prev = _composite(integrand, edges)
    for _ in range(5):
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
        cur = _composite(integrand, edges)
        if abs(cur - prev) <= max(rel_tol * abs(cur), abs_tol, 1e-300):
            return head_val + cur
        prev = cur
    raise EnergyDivergenceError("panel refinement did not converge")


def energy_density(w, dw, p: float):
    aw = np.abs(w)
    return 0.5 * dw * dw + 0.5 * w * w / (p - 1) - aw ** (p + 1) / (p + 1)


def checked_integral(h, N: int, *, order: int = DEFAULT_ORDER, rel_check: float = 1e-10) -> float:
    """∫ h a dρ by generalized Gauss-Laguerre, falling back to panels.

    The rule at ``order`` is compared with the half-order rule; algebraically
    decaying integrands (power-law tails) converge slowly in Laguerre nodes
    and are sent to the composite panel rule instead.
    """
    full = WeightedQuadrature(N, order).integrate(h)
    half = WeightedQuadrature(N, order // 2).integrate(h)
    if abs(full - half) <= rel_check * max(abs(full), 1e-300):
        return full
    try:
        return weighted_integral(h, N)
    except EnergyDivergenceError as exc:
        raise EnergyDivergenceError(f"quadrature did not converge ({full} vs {half})") from exc


def energy(profile, profile_derivative, params: ProblemParams, *, order: int = DEFAULT_ORDER,
           head=None) -> float:
    """E(w) for a radial profile given as vectorized callables w(ρ), w'(ρ).

    Smooth bounded profiles use generalized Gauss-Laguerre, checked against
    the half-order rule.  Profiles singular at the origin pass
    ``head=(c, q)`` with the leading power law of the energy density and go
    through the panel rule.
    """
    p = params.p

    def dens(x):
        return energy_density(np.asarray(profile(x), dtype=float), np.asarray(profile_derivative(x), dtype=float), p)

    if head is not None:
        return weighted_integral(dens, params.N, head=head)
    return checked_integral(dens, params.N, order=order)


def potential_integral(profile, params: ProblemParams, *, order: int = DEFAULT_ORDER) -> float:
    """∫ |w|^{p+1} ρ^{N−1} e^{−ρ²/4} dρ, the integral in the steady-state energy identity."""
    p = params.p
    return checked_integral(lambda x: np.abs(np.asarray(profile(x), dtype=float)) ** (p + 1), params.N, order=order)


def energy_kappa(params: ProblemParams) -> float:
    """E(κ) = (p−1)/(2(p+1)) κ^{p+1} 2^{N−1} Γ(N/2)."""
    p = params.p
    return (p - 1) / (2 * (p + 1)) * params.kappa ** (p + 1) * weight_moment(params.N)


def _require_supercritical(params: ProblemParams):
    if regime(params.p, params.pS) != "super":
        raise ParameterDomainError(f"E(phi_inf) diverges unless p > pS = {params.pS}")


def energy_singular(params: ProblemParams, method: str = "gamma") -> float:
    """E(φ∞) by the closed form (``gamma``) or by direct quadrature (``quadrature``)."""
    _require_supercritical(params)
    p, N, L, xi = params.p, params.N, params.require_L(), params.xi
    if method == "gamma":
        return (0.5 - 1 / (p + 1)) * L ** (p + 1) * 2.0 ** (N - 2 * xi - 1) * gamma(N / 2 - xi)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    m = params.m

    def dens(x):
        w = L * x ** (-m)
        dw = -m * w / x
        return energy_density(w, dw, p)

    # the dominant power near 0 is ρ^{-2m-2} from both ½w'² and −w^{p+1}/(p+1)
    c_head = L * L * (0.5 * m * m) - L ** (p + 1) / (p + 1)
    head = (c_head, -2 * m - 2)
    # the w² term is ρ^{-2m}, weaker; include it in the head explicitly
    val = weighted_integral(dens, N, head=head)
    s2 = -2 * m + N - 1
    eps = HEAD_EPS
    extra = 0.5 * L * L / (p - 1) * 2.0 ** s2 * special.gamma((s2 + 1) / 2) * special.gammainc((s2 + 1) / 2, eps * eps / 4)
    return val + extra


def f_xi(xi: float, N: int) -> float:
    """Γ(N/2 − ξ)/Γ(N/2) · ((N − 1 − ξ)/2)^ξ on (1, N/2)."""
    if not (1 < xi < N / 2):
        raise ParameterDomainError(f"xi must lie in (1, N/2), got {xi}")
    return gamma(N / 2 - xi) / gamma(N / 2) * ((N - (1 + xi)) / 2) ** xi


def energy_ratio_F(params: ProblemParams) -> float:
    """F(p) = E(φ∞)/E(κ), evaluated through f(ξ)."""
    _require_supercritical(params)
    return f_xi(params.xi, params.N)


def energy_ratio_quadrature(params: ProblemParams) -> float:
    """F(p) from quadrature energies of φ∞ and κ (independent of the Gamma formula)."""
    kappa = params.kappa
    e_k = energy(lambda x: np.full_like(x, kappa), lambda x: np.zeros_like(x), params)
    return energy_singular(params, "quadrature") / e_k


def grid_energy(rho, values, params: ProblemParams) -> float:
    """Energy of a grid function on a uniform grid [0, R] by composite Simpson."""
    from scipy.integrate import simpson

    rho = np.asarray(rho, dtype=float)
    v = np.asarray(values, dtype=float)
    dv = np.gradient(v, rho, edge_order=2)
    a = rho ** (params.N - 1) * np.exp(-0.25 * rho * rho)
    return float(simpson(energy_density(v, dv, params.p) * a, x=rho))


@dataclass
class ProbeEntry:
    alpha: float
    k: int | None
    energy: float
    below_singular: bool
    above_kappa: bool


@dataclass
class EnergyProbeReport:
    N: int
    p: float
    E_kappa: float
    E_singular: float
    entries: list = field(default_factory=list)

    @property
    def all_between(self) -> bool:
        return all(e.below_singular and e.above_kappa for e in self.entries)


def steady_state_energy(state, params: ProblemParams) -> float:
    return energy(state.value, state.derivative, params)


def energy_condition_probe(params: ProblemParams, atlas) -> EnergyProbeReport:
    """Compare E(w_a) against E(κ) and E(φ∞) for each computed atlas member.

    Only the computed instances are reported; no global claim is made.
    """
    e_k = energy_kappa(params)
    e_s = energy_singular(params)
    rep = EnergyProbeReport(params.N, params.p, e_k, e_s)
    for st in atlas:
        e = steady_state_energy(st, params)
        rep.entries.append(ProbeEntry(st.alpha, st.k, e, e < e_s, e > e_k))
    return rep
