"""Adaptive integration of the radial steady equations with dense output.

Two frames are supported:

* ``physical``:     w'' + (N-1)/r w' + w^p = 0
* ``selfsimilar``:  w'' + ((N-1)/ρ - ρ/2) w' - w/(p-1) + w^p = 0

The coordinate singularity at the origin is removed by starting at a small
radius from the even Taylor series of the regular solution.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .params import ParameterDomainError, ProblemParams

START_RADIUS = 1e-4
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
BLOWUP_LEVEL = 1e8


class Frame(str, enum.Enum):
    physical = "physical"
    selfsimilar = "selfsimilar"


class Termination(str, enum.Enum):
    reached_rmax = "reached_rmax"
    hit_zero = "hit_zero"
    blew_up = "blew_up"
    stiff_failure = "stiff_failure"


class StiffFailure(RuntimeError):
    """Step size underflow in the explicit integrator."""


_STATUS = {
    kernels.REACHED_RMAX: Termination.reached_rmax,
    kernels.HIT_ZERO: Termination.hit_zero,
    kernels.BLEW_UP: Termination.blew_up,
    kernels.STIFF_FAILURE: Termination.stiff_failure,
    kernels.MAX_STEPS: Termination.stiff_failure,
}


def _ss(frame) -> float:
    return 1.0 if Frame(frame) is Frame.selfsimilar else 0.0


def origin_series(a: float, params: ProblemParams, frame, order: int = 4) -> np.polynomial.Polynomial:
    """Taylor polynomial of the regular solution with w(0)=a, in the variable ρ²."""
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    if a < 0:
        raise ParameterDomainError("origin value must be nonnegative")
    N, p = params.N, params.p
    ss = _ss(frame)
    ap1 = a ** (p - 1) if a > 0 else 0.0
    c2 = (ss * a / (p - 1) - a * ap1) / (2 * N)
    coef = [a, c2]
    if order == 4:
        coef.append(c2 * (ss + ss / (p - 1) - p * ap1) / (4 * (N + 2)))
    return np.polynomial.Polynomial(coef)


@dataclass(frozen=True)
class RadialIVP:
    """Initial value problem for a radial steady equation.

    Regular problems start from ``origin_value`` via the origin series; pass
    ``start_state=(w, w')`` to start from explicit data at ``start_radius``.
    """

    params: ProblemParams
    frame: Frame
    origin_value: float | None = None
    start_radius: float = START_RADIUS
    start_state: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "frame", Frame(self.frame))
        if (self.origin_value is None) == (self.start_state is None):
            raise ValueError("give exactly one of origin_value or start_state")
        if not self.start_radius > 0:
            raise ValueError("start radius must be positive")

    def initial_state(self) -> tuple[float, float]:
        if self.start_state is not None:
            return float(self.start_state[0]), float(self.start_state[1])
        poly = origin_series(self.origin_value, self.params, self.frame, 4)
        r2 = self.start_radius ** 2
        c = poly.coef
        w = poly(r2)
        dw = self.start_radius * (2 * c[1] + 4 * c[2] * r2)
        return float(w), float(dw)

    def rhs_second(self, rho, w, dw):
        """w'' from the ODE (vectorized)."""
        N, p = self.params.N, self.params.p
        ss = _ss(self.frame)
        aw = np.abs(w)
        return -((N - 1) / rho - 0.5 * ss * rho) * dw + ss * w / (p - 1) - aw ** (p - 1) * w


class DenseSolution:
    """Piecewise quartic dense output of an accepted Dormand-Prince run.

    Calling ``sol(rho, nu)`` returns w (nu=0), w' (nu=1) or w'' (nu=2, from the
    ODE).  Regular solutions are also defined on [0, ρ₀) through the origin series.
    """

    def __init__(self, ivp: RadialIVP, knots, rcont, termination: Termination, max_radius: float):
        self.ivp = ivp
        self.knots = np.asarray(knots)
        self.rcont = np.asarray(rcont)
        self.termination = termination
        self.max_radius = float(max_radius)
        self.tangencies: list[float] = []
        # step widths used by the interpolant; fixed before any trimming
        self._widths = np.diff(self.knots)
        self._series = None
        if ivp.origin_value is not None:
            self._series = origin_series(ivp.origin_value, ivp.params, ivp.frame, 4)

    @property
    def params(self) -> ProblemParams:
        return self.ivp.params

    @property
    def min_radius(self) -> float:
        return 0.0 if self._series is not None else float(self.knots[0])

    @property
    def n_steps(self) -> int:
        return self.rcont.shape[0]

    def _eval_steps(self, rho, comp):
        idx = np.clip(np.searchsorted(self.knots, rho, side="right") - 1, 0, self.n_steps - 1)
        th = (rho - self.knots[idx]) / self._widths[idx]
        th1 = 1.0 - th
        rc = self.rcont[idx, :, comp]
        return rc[..., 0] + th * (rc[..., 1] + th1 * (rc[..., 2] + th * (rc[..., 3] + th1 * rc[..., 4])))

    def __call__(self, rho, nu: int = 0):
        rho_arr = np.asarray(rho, dtype=float)
        scalar = rho_arr.ndim == 0
        r = np.atleast_1d(rho_arr)
        lo, hi = self.min_radius, self.max_radius
        if np.any(r < lo - 1e-14) or np.any(r > hi * (1 + 1e-12) + 1e-14):
            raise ValueError(f"radius outside the computed range [{lo}, {hi}]")
        r = np.clip(r, lo, hi)
        if nu == 2:
            w = self(r, 0)
            dw = self(r, 1)
            out = np.empty_like(r)
            pos = r > 0
            out[pos] = self.ivp.rhs_second(r[pos], w[pos], dw[pos])
            if np.any(~pos):
                out[~pos] = 2 * self._series.coef[1]
        else:
            out = np.empty_like(r)
            head = r < self.knots[0]
            if np.any(head):
                c = self._series.coef
                rh = r[head]
                if nu == 0:
                    out[head] = self._series(rh * rh)
                else:
                    out[head] = rh * (2 * c[1] + 4 * c[2] * rh * rh)
            tail = ~head
            if np.any(tail):
                out[tail] = self._eval_steps(r[tail], nu)
        return float(out[0]) if scalar else out

    def value(self, rho):
        return self(rho, 0)

    def derivative(self, rho):
        return self(rho, 1)


def _locate_zero(sol: DenseSolution, lo: float, hi: float, tol: float = 1e-13) -> float:
    flo = sol(lo)
    for _ in range(200):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        fm = sol(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_tangencies(sol: DenseSolution, rel_tol: float = 1e-10) -> list[float]:
    """Steps where w' changes sign and |w| dips near zero without crossing."""
    k, rc = sol.knots, sol.rcont
    if sol.n_steps == 0:
        return []
    dstart = rc[:, 0, 1]
    dend = np.append(rc[1:, 0, 1], sol(k[-1], 1))
    scale = max(np.max(np.abs(rc[:, 0, 0])), 1e-300)
    out = []
    for i in np.nonzero(dstart * dend < 0)[0]:
        xs = np.linspace(k[i], k[i + 1], 33)
        ws = sol(xs)
        j = int(np.argmin(np.abs(ws)))
        if np.abs(ws[j]) < rel_tol * scale and np.all(ws >= 0) | np.all(ws <= 0):
            out.append(float(xs[j]))
    return out


def integrate(ivp: RadialIVP, rmax: float, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
              blowup_level: float = BLOWUP_LEVEL, max_steps: int = 2_000_000) -> DenseSolution:
    """Adaptive DOPRI5 integration from the start radius up to rmax or an event."""
    rho0 = ivp.start_radius
    if not (0 < rho0 < rmax):
        raise ValueError("need 0 < start radius < rmax")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    w0, dw0 = ivp.initial_state()
    N, p = ivp.params.N, ivp.params.p
    h0 = min(1e-3 * rho0 + 1e-6, 0.01 * (rmax - rho0))
    n, knots, rcont, status = kernels.active.dopri(
        float(N), p, _ss(ivp.frame), rho0, w0, dw0, float(rmax), rtol, atol, h0,
        blowup_level, 1e-14, max_steps)
    term = _STATUS[int(status)]
    if n == 0:
        raise StiffFailure("integrator made no progress")
    sol = DenseSolution(ivp, knots, rcont, term, knots[-1])
    if term is Termination.hit_zero:
        root = _locate_zero(sol, float(knots[-2]), float(knots[-1]))
        sol.knots = sol.knots.copy()
        sol.knots[-1] = root
        sol.max_radius = root
    sol.tangencies = _scan_tangencies(sol)
    if term is Termination.stiff_failure:
        raise StiffFailure(f"step size underflow at rho={knots[-1]:.6g}")
    return sol
