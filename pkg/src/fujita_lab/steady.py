"""Radial steady states: shooting, the graded sets A_k, c_a and b(α).

Self-similar profiles are exponentially unstable when integrated outward
(perturbations grow like e^{ρ²/4}), so a bounded state can only be followed
numerically up to the radius where the two final bisection shots separate.
Beyond that trusted radius the profile is continued by its fitted
power-law expansion ρ^{-m}(c + dρ^{-2} + eρ^{-4}).
"""
from __future__ import annotations

import enum
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._accel import worker_count
from .odecore import DenseSolution, Frame, RadialIVP, Termination, integrate
from .io import atomic_csv, fmt
from .params import ParameterDomainError, ProblemParams, regime
from .zeronum import ZeroCount, zero_number

SHOOT_RTOL = 1e-12
SHOOT_ATOL = 1e-14
DEFAULT_RMAX = {Frame.selfsimilar: 40.0, Frame.physical: 200.0}
AGREE_TOL = 1e-6
COUNT_SAMPLES = 4000


class InconclusiveClassification(RuntimeError):
    """The shot neither hit zero nor settled to a power law by rmax."""


class InvalidBracket(ValueError):
    """Both bracket endpoints fall on the same side of the discriminator."""


class IllConditionedFit(RuntimeError):
    """The asymptotic terms are not separated on the fitting window."""


class Kind(str, enum.Enum):
    bounded_positive = "bounded_positive"
    hits_zero = "hits_zero"
    singular_reference = "singular_reference"


@dataclass(frozen=True)
class PowerTail:
    """ρ^{-m}(c + dρ^{-2} + eρ^{-4}) for ρ ≥ start."""

    m: float
    c: float
    d: float
    e: float
    start: float

    def value(self, rho):
        r = np.asarray(rho, dtype=float)
        return r ** (-self.m) * (self.c + self.d * r ** -2 + self.e * r ** -4)

    def derivative(self, rho):
        r = np.asarray(rho, dtype=float)
        m = self.m
        return -(r ** (-m - 1)) * (m * self.c + (m + 2) * self.d * r ** -2 + (m + 4) * self.e * r ** -4)


@dataclass(frozen=True)
class SteadyState:
    """One classified shot.

    ``value``/``derivative`` evaluate the profile on its whole domain: the
    dense ODE solution up to ``trusted_radius`` and the power tail beyond
    (bounded states only).
    """

    params: ProblemParams
    alpha: float
    frame: Frame
    profile: DenseSolution | None
    kind: Kind
    k: int | None = None
    rho_alpha: float | None = None
    c_a: float | None = None
    trusted_radius: float | None = None
    tail: PowerTail | None = None
    zero_count: ZeroCount | None = field(default=None, repr=False)

    @property
    def is_constant(self) -> bool:
        return self.profile is None and self.kind is Kind.bounded_positive

    @property
    def domain_end(self) -> float:
        if self.kind is Kind.hits_zero:
            return float(self.rho_alpha)
        return math.inf

    def _split(self, rho):
        r = np.asarray(rho, dtype=float)
        if np.any(r < 0) or np.any(r > self.domain_end * (1 + 1e-12)):
            raise ValueError("radius outside the domain of the steady state")
        return r

    def value(self, rho):
        r = self._split(rho)
        if self.kind is Kind.singular_reference:
            return self.params.phi_inf(r)
        if self.is_constant:
            return np.full_like(r, self.alpha) if r.ndim else float(self.alpha)
        return self._eval(r, 0)

    def derivative(self, rho):
        r = self._split(rho)
        if self.kind is Kind.singular_reference:
            return -self.params.m * self.params.phi_inf(r) / r
        if self.is_constant:
            return np.zeros_like(r) if r.ndim else 0.0
        return self._eval(r, 1)

    __call__ = value

    def _eval(self, r, nu):
        if self.tail is None:
            return self.profile(r, nu)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        inner = r <= self.tail.start
        out[inner] = self.profile(r[inner], nu)
        out[~inner] = self.tail.value(r[~inner]) if nu == 0 else self.tail.derivative(r[~inner])
        return float(out[0]) if scalar else out


def singular_state(params: ProblemParams) -> SteadyState:
    params.require_L()
    return SteadyState(params, math.inf, Frame.selfsimilar, None, Kind.singular_reference)


def kappa_state(params: ProblemParams) -> SteadyState:
    """The constant state κ, the only member of A_1, built analytically."""
    zc = None
    if params.L is not None:
        rho = (params.L / params.kappa) ** ((params.p - 1) / 2)
        zc = ZeroCount((0.0, math.inf), 1, (rho,))
    return SteadyState(params, params.kappa, Frame.selfsimilar, None, Kind.bounded_positive,
                       k=1 if zc else None, c_a=None, zero_count=zc)


def origin_cutoff(params: ProblemParams, alpha: float) -> float:
    """Left end for comparisons with φ∞: below it φ∞ > 2α, so no intersection can occur."""
    L = params.require_L()
    return min(1e-2, (L / (2 * alpha)) ** ((params.p - 1) / 2))


def count_against_phi_inf(params: ProblemParams, f, lo: float, hi: float,
                          n: int = COUNT_SAMPLES) -> ZeroCount:
    """Intersections of a profile with φ∞ on (lo, hi).

    Sign changes are counted on the relative difference f(ρ)ρ^m/L − 1,
    which has the same zeros and a bounded dynamic range.
    """
    L, m = params.require_L(), params.m
    return zero_number(lambda x: np.asarray(f(x)) * x ** m / L - 1.0, (lo, hi), n, spacing="log")


def _fit_tail(params: ProblemParams, value, lo: float, hi: float) -> PowerTail:
    m = params.m
    r = np.linspace(lo, hi, 64)
    g = np.asarray(value(r)) * r ** m
    A = np.column_stack([np.ones_like(r), r ** -2, r ** -4])
    coef, *_ = np.linalg.lstsq(A, g, rcond=None)
    return PowerTail(m, float(coef[0]), float(coef[1]), float(coef[2]), float(hi))


def _run(params, alpha, frame, rmax):
    ivp = RadialIVP(params, frame, origin_value=float(alpha))
    return integrate(ivp, rmax, rtol=SHOOT_RTOL, atol=SHOOT_ATOL)


def shoot(params: ProblemParams, alpha: float, frame=Frame.selfsimilar, rmax: float | None = None) -> SteadyState:
    """Integrate from the origin with w(0) = α and classify the outcome.

    ``hits_zero`` shots report ρ_α and the intersection count with φ∞ on
    [0, ρ_α].  A shot that stays positive up to rmax must settle to a clean
    power law on [0.6·rmax, rmax]; c_a is its extrapolated constant.
    """
    frame = Frame(frame)
    if not alpha > 0:
        raise ParameterDomainError("alpha must be positive")
    if frame is Frame.selfsimilar and abs(alpha - params.kappa) <= 1e-14 * params.kappa:
        return kappa_state(params)
    rmax = DEFAULT_RMAX[frame] if rmax is None else float(rmax)
    sol = _run(params, alpha, frame, rmax)
    have_L = params.L is not None
    if sol.termination is Termination.hit_zero:
        rho_a = sol.max_radius
        zc = None
        if have_L:
            zc = count_against_phi_inf(params, sol, origin_cutoff(params, alpha), rho_a * (1 - 1e-9))
        return SteadyState(params, float(alpha), frame, sol, Kind.hits_zero,
                           k=zc.count if zc else None, rho_alpha=rho_a, zero_count=zc)
    if sol.termination is not Termination.reached_rmax:
        raise InconclusiveClassification(f"shot terminated with {sol.termination.value}")
    tail = _fit_tail(params, sol, 0.6 * rmax, rmax)
    r = np.linspace(0.6 * rmax, rmax, 64)
    resid = np.max(np.abs(tail.value(r) - sol(r)) / np.abs(sol(r)))
    if resid > 1e-6 or np.any(sol(r, 1) >= 0):
        raise InconclusiveClassification(
            f"profile is positive at rmax={rmax} but not a clean power law (residual {resid:.2e}); raise rmax")
    zc = None
    if have_L:
        zc = _count_with_tail(params, sol, tail, alpha)
    return SteadyState(params, float(alpha), frame, sol, Kind.bounded_positive, k=zc.count if zc else None,
                       c_a=tail.c, trusted_radius=rmax, tail=tail, zero_count=zc)


def _count_with_tail(params, sol, tail: PowerTail, alpha: float, n: int = COUNT_SAMPLES) -> ZeroCount:
    """Count on [cutoff, R*] and add the crossing, if any, implied by the tail sign."""
    zc = count_against_phi_inf(params, sol, origin_cutoff(params, alpha), tail.start, n)
    inner_end = float(sol(tail.start)) * tail.start ** params.m - params.L
    outer = tail.c - params.L
    extra = 1 if inner_end * outer < 0 else 0
    if extra:
        return ZeroCount(zc.interval[:1] + (math.inf,), zc.count + 1,
                         zc.crossing_locations + (tail.start,), zc.tangency_flag, zc.tangency_locations)
    return ZeroCount((zc.interval[0], math.inf), zc.count, zc.crossing_locations,
                     zc.tangency_flag, zc.tangency_locations)


@dataclass(frozen=True)
class NotFound:
    """find_Ak failed to produce a verified member; the refined bracket is kept."""

    k: int
    bracket: tuple
    reason: str


def _side(params, alpha, k, rmax) -> bool:
    """True when the shot intersects φ∞ more than k times before its first zero."""
    sol = _run(params, alpha, Frame.selfsimilar, rmax)
    end = sol.max_radius * (1 - 1e-9)
    zc = count_against_phi_inf(params, sol, origin_cutoff(params, alpha), end)
    return zc.count > k


def _agreement_radius(a: DenseSolution, b: DenseSolution, tol: float) -> float:
    hi = min(a.max_radius, b.max_radius)
    r = np.linspace(0.0, hi, 8001)[1:]
    wa = a(r)
    rel = np.abs(wa - b(r)) / np.maximum(np.abs(wa), 1e-300)
    bad = np.nonzero((rel > tol) | (wa <= 0))[0]
    return float(r[bad[0] - 1]) if bad.size else float(hi)


def find_Ak(params: ProblemParams, k: int, alpha_bracket, *, xtol: float = 1e-12,
            rmax: float = 40.0):
    """Bisect for a bounded self-similar steady state with k intersections with φ∞.

    The discriminator is whether the shot's intersection count exceeds k
    before its first zero.  The result is verified afterwards (decreasing,
    w(0) > κ, k recounted at double density); a failed verification, or
    p > pL where no such state exists, yields a ``NotFound`` report.
    """
    if k == 1:
        raise ValueError("A_1 = {kappa} is handled analytically; use kappa_state")
    if k < 2:
        raise ValueError("k must be at least 2")
    if regime(params.p, params.pS) != "super":
        raise ParameterDomainError("bounded nonconstant steady states need p > pS")
    lo, hi = sorted(float(a) for a in alpha_bracket)
    if regime(params.p, params.pL) == "super":
        return NotFound(k, (lo, hi), "no bounded nonconstant steady states exist for p > pL")
    s_lo, s_hi = _side(params, lo, k, rmax), _side(params, hi, k, rmax)
    if s_lo == s_hi:
        raise InvalidBracket(f"bracket [{lo}, {hi}] does not straddle the k={k} discriminator")
    while hi - lo > xtol * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _side(params, mid, k, rmax) == s_lo:
            lo = mid
        else:
            hi = mid
    sol_lo = _run(params, lo, Frame.selfsimilar, rmax)
    sol_hi = _run(params, hi, Frame.selfsimilar, rmax)
    r_star = _agreement_radius(sol_lo, sol_hi, AGREE_TOL)
    alpha = lo
    try:
        state = _bounded_from_shot(params, alpha, sol_lo, r_star)
    except InconclusiveClassification as exc:
        return NotFound(k, (lo, hi), str(exc))
    if state.k != k:
        return NotFound(k, (lo, hi), f"bisection converged to a state with k={state.k}")
    return state


def _bounded_from_shot(params, alpha, sol, r_star) -> SteadyState:
    if r_star < 2.0:
        raise InconclusiveClassification(f"trusted radius {r_star:.3g} too small for a tail fit")
    tail = _fit_tail(params, sol, 0.6 * r_star, r_star)
    if not tail.c > 0:
        raise InconclusiveClassification("fitted c_a is not positive")
    r = np.linspace(1e-6, r_star, 4000)
    rt = np.geomspace(r_star, 50 * r_star, 200)
    if np.any(sol(r, 1) >= 0) or np.any(tail.derivative(rt) >= 0):
        raise InconclusiveClassification("profile is not strictly decreasing")
    if not alpha > params.kappa:
        raise InconclusiveClassification("w(0) <= kappa")
    zc = _count_with_tail(params, sol, tail, alpha)
    zc2 = _count_with_tail(params, sol, tail, alpha, 2 * COUNT_SAMPLES)
    if zc.count != zc2.count:
        raise InconclusiveClassification("intersection count changes under grid doubling")
    return SteadyState(params, float(alpha), Frame.selfsimilar, sol, Kind.bounded_positive, k=zc.count,
                       c_a=tail.c, trusted_radius=r_star, tail=tail, zero_count=zc)


# ---------------------------------------------------------------- physical family

_PHI_CACHE: dict = {}
_PHI_LOCK = threading.Lock()
PHI_RTOL = 1e-13
PHI_ATOL = 1e-16


def phi_one(params: ProblemParams, rmax: float) -> DenseSolution:
    """Cached φ₁ in the physical frame, covering at least [0, rmax]."""
    key = (params.N, params.p)
    with _PHI_LOCK:
        sol = _PHI_CACHE.get(key)
        if sol is not None and sol.max_radius >= rmax:
            return sol
        span = 200.0 if sol is None else 2 * sol.max_radius
        while span < rmax:
            span *= 2
        sol = integrate(RadialIVP(params, Frame.physical, origin_value=1.0), span,
                        rtol=PHI_RTOL, atol=PHI_ATOL, max_steps=20_000_000)
        if sol.termination is not Termination.reached_rmax:
            raise ParameterDomainError(f"phi_1 is not positive on [0, {span}] (p < pS?)")
        _PHI_CACHE[key] = sol
        return sol


def phi_alpha(params: ProblemParams, alpha: float, r):
    """φ_α(r) = α φ₁(α^{(p−1)/2} r)."""
    if regime(params.p, params.pS) == "sub":
        raise ParameterDomainError("the positive family phi_alpha needs p >= pS")
    if not alpha > 0:
        raise ParameterDomainError("alpha must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    x = alpha ** ((params.p - 1) / 2) * r
    sol = phi_one(params, float(np.max(x)) if x.size else 1.0)
    return alpha * sol(x)


def phi_alpha_derivative(params: ProblemParams, alpha: float, r):
    r = np.asarray(r, dtype=float)
    scale = alpha ** ((params.p - 1) / 2)
    x = scale * r
    sol = phi_one(params, float(np.max(x)) if x.size else 1.0)
    return alpha * scale * sol(x, 1)


def far_field_limit(params: ProblemParams, radii=(20.0, 40.0)) -> tuple[float, float]:
    """Richardson-extrapolated lim r^m φ₁(r) from two radii.

    The leading correction to r^m φ₁ is b r^{β+m} for p > pJL, which fixes
    the extrapolation exponent.  Returns (extrapolated, raw value at the larger radius).
    """
    m = params.m
    r1, r2 = (float(r) for r in radii)
    sol = phi_one(params, r2)
    g1, g2 = r1 ** m * sol(r1), r2 ** m * sol(r2)
    q = params.require_beta() + m
    w = (r2 / r1) ** q
    return float((g2 - w * g1) / (1 - w)), float(g2)


@dataclass(frozen=True)
class BFit:
    b: float
    coefficients: tuple
    window: tuple
    condition: float


def fit_b_details(params: ProblemParams, alpha: float = 1.0, *, rmax: float = 80.0, profile=None,
                  n: int = 80) -> BFit:
    """Least-squares fit of (L r^{-m} − φ_α(r)) r^{-β} = b + c₁r^{-√D} + c₂r^{β+m}.

    D is the discriminant of the indicial equation.  The window is
    [rmax/8, rmax] in the α = 1 variable, i.e. scaled by α^{-(p−1)/2}.
    ``profile`` overrides the default cached φ_α evaluation.
    """
    beta = params.require_beta()
    if regime(params.p, params.pJL) != "super":
        raise ParameterDomainError("b(alpha) needs p > pJL")
    L, m = params.require_L(), params.m
    scale = alpha ** (-(params.p - 1) / 2)
    r = np.geomspace(rmax / 8, rmax, n) * scale
    phi = np.asarray(profile(r) if profile is not None else phi_alpha(params, alpha, r))
    g = (L * r ** -m - phi) * r ** -beta
    sd = math.sqrt(params.discriminant)
    A = np.column_stack([np.ones_like(r), (r / scale) ** -sd, (r / scale) ** (beta + m)])
    coef, _, _, sv = np.linalg.lstsq(A, g, rcond=None)
    cond = float(sv[0] / sv[-1])
    # the b-term must stand well above the accuracy of φ at the far end
    signal = abs(coef[0]) * r[-1] ** beta
    noise = 1e-11 * phi[-1]
    if cond > 1e9 or signal < 1e3 * noise:
        raise IllConditionedFit(f"b term not separated on the window (cond={cond:.2e}, signal/noise={signal / noise:.2e})")
    return BFit(float(coef[0]), tuple(float(c) for c in coef), (float(r[0]), float(r[-1])), cond)


def fit_b(params: ProblemParams, alpha: float = 1.0, *, rmax: float = 80.0, profile=None) -> float:
    return fit_b_details(params, alpha, rmax=rmax, profile=profile).b


# ---------------------------------------------------------------- atlas

def default_sweep(params: ProblemParams, n: int = 64, top: float = 10.0) -> np.ndarray:
    """n equally spaced α in (κ, top·κ]."""
    return params.kappa * (1 + (top - 1) * np.arange(1, n + 1) / n)


def atlas_sweep(params: ProblemParams, alphas, frame=Frame.selfsimilar, rmax: float | None = None,
                workers: int | None = None) -> list[SteadyState]:
    """Shoot every α in parallel; results keep the input order."""
    alphas = [float(a) for a in alphas]
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(alphas) < 2:
        return [shoot(params, a, frame, rmax) for a in alphas]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda a: shoot(params, a, frame, rmax), alphas))


def below_kappa_disjoint(a: SteadyState, b: SteadyState, n: int = 4000) -> bool:
    """True when two bounded states do not cross where both lie below κ."""
    kappa = a.params.kappa
    hi = 4 * max(a.trusted_radius or 10.0, b.trusted_radius or 10.0)
    r = np.linspace(1e-6, hi, n)
    wa, wb = a.value(r), b.value(r)
    mask = (wa < kappa) & (wb < kappa)
    d = np.where(mask, wa - wb, np.nan)
    s = np.sign(d[mask & (np.abs(d) > 1e-9 * kappa)])
    return bool(np.all(s == s[0])) if s.size else True


ATLAS_COLUMNS = ("N", "p", "alpha", "kind", "k", "rho_alpha", "c_a", "E")


def atlas_rows(states, energies=None):
    for i, st in enumerate(states):
        e = None if energies is None else energies[i]
        yield [fmt(st.params.N), fmt(st.params.p), fmt(st.alpha), st.kind.value, fmt(st.k),
               fmt(st.rho_alpha), fmt(st.c_a), fmt(e)]


def write_atlas_csv(path, states, energies=None):
    atomic_csv(path, ATLAS_COLUMNS, atlas_rows(states, energies))
