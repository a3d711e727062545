"""Method-of-lines evolution of the radial equations.

physical:     u_t = u_rr + (N−1)/r u_r + u^p
selfsimilar:  v_s = v_ρρ + ((N−1)/ρ − ρ/2) v_ρ − v/(p−1) + v^p

Space is discretized by a conservative finite-volume scheme on a uniform
radial grid: cell i carries the exact weighted volume V_i = ∫ a dρ with
a = ρ^{N−1} (physical) or ρ^{N−1}e^{−ρ²/4} (selfsimilar), and the face
fluxes are a(ρ_{i+½})(v_{i+1} − v_i)/h.  The origin needs no special
treatment (a vanishes there), and the semi-discrete energy

    E_h = Σ a_{i+½}(v_{i+1} − v_i)²/(2h) + Σ V_i F(v_i)

decays exactly along the semi-discrete flow.  Time stepping is adaptive
Bogacki-Shampine 3(2) with a stability cap on the step.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigvalsh_tridiagonal

from . import kernels
from .io import atomic_csv
from .odecore import Frame
from .params import ParameterDomainError, ProblemParams
from .zeronum import sign_changes

BLOWUP_LEVEL = 1e8
GROWTH_RECORD = 1.02
DEFAULT_POINTS = 2000
DEFAULT_RADIUS = 20.0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class BlowupDetected(RuntimeError):
    pass


class PositivityFailure(RuntimeError):
    """The stepper could not keep the solution nonnegative."""


class InsufficientWindow(ValueError):
    """Too few samples before the blowup event."""


class BC(str, enum.Enum):
    pinned = "pinned"
    neumann = "neumann"


def _log_weight(N, r, frame):
    with np.errstate(divide="ignore"):
        out = (N - 1) * np.log(r)
    if frame is Frame.selfsimilar:
        out = out - 0.25 * r * r
    return out


def _weight(N, r, frame):
    return np.exp(_log_weight(N, r, frame))


@dataclass(frozen=True)
class Grid:
    """Uniform radial grid ρ_i = i·h on [0, R] with finite-volume weights."""

    R: float
    n: int
    N: int
    frame: Frame
    rho: np.ndarray = field(repr=False, compare=False)
    volumes: np.ndarray = field(repr=False, compare=False)
    flux_coef: np.ndarray = field(repr=False, compare=False)

    @property
    def h(self) -> float:
        return self.R / (self.n - 1)

    @classmethod
    def build(cls, R: float, n: int, N: int, frame) -> "Grid":
        frame = Frame(frame)
        if n < 5 or not R > 0:
            raise ValueError("grid needs R > 0 and at least 5 points")
        h = R / (n - 1)
        rho = h * np.arange(n)
        lo = np.maximum(rho - 0.5 * h, 0.0)
        hi = np.minimum(rho + 0.5 * h, R)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _GL_X[None, :]
        vol = half * (_weight(N, x, frame) @ _GL_W)
        faces = rho[:-1] + 0.5 * h
        flux = _weight(N, faces, frame) / h
        return cls(float(R), int(n), int(N), frame, rho, vol, flux)

    def gershgorin(self) -> float:
        """Upper bound on the spectral radius of the diffusion matrix."""
        f = np.zeros(self.n + 1)
        f[1:-1] = self.flux_coef
        return float(np.max(2 * (f[:-1] + f[1:]) / self.volumes))

    def spectral_radius(self) -> float:
        """Largest |eigenvalue| of the diffusion matrix, from its symmetrized form."""
        d = np.zeros(self.n)
        d[:-1] += self.flux_coef
        d[1:] += self.flux_coef
        off = self.flux_coef / np.sqrt(self.volumes[:-1] * self.volumes[1:])
        lam = eigvalsh_tridiagonal(-d / self.volumes, off, select="i", select_range=(0, 0))[0]
        return float(-lam)

    def stable_dt(self) -> float:
        """Step cap: 0.4h² and the explicit stability limit 2/λ_max.

        The cells next to the origin are small (volume ~ h^N) so λ_max is
        about 2N/h², which makes 2/λ_max the binding constraint for N > 5.
        """
        return min(0.4 * self.h ** 2, 2.0 / self.spectral_radius())


@dataclass
class HistoryRow:
    time: float
    sup_norm: float
    energy: float
    z_vs_phi_inf: int | None


@dataclass
class EvolutionState:
    frame: Frame
    grid: Grid
    values: np.ndarray
    time: float
    params: ProblemParams
    bc: BC = BC.pinned
    history: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    status: str = "running"
    stats: dict = field(default_factory=dict)

    def copy(self) -> "EvolutionState":
        return replace(self, values=self.values.copy(), history=list(self.history),
                       snapshots=list(self.snapshots), stats=dict(self.stats))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def make_state(params: ProblemParams, frame, values_or_fn, *, R: float = DEFAULT_RADIUS,
               n: int = DEFAULT_POINTS, time: float = 0.0, bc=BC.pinned) -> EvolutionState:
    frame = Frame(frame)
    grid = Grid.build(R, n, params.N, frame)
    vals = values_or_fn(grid.rho) if callable(values_or_fn) else values_or_fn
    vals = np.array(np.broadcast_to(np.asarray(vals, dtype=float), grid.rho.shape))
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ParameterDomainError("initial data must be finite and nonnegative")
    st = EvolutionState(frame, grid, vals, float(time), params, BC(bc))
    st.history.append(_history_row(st))
    st.snapshots.append((st.time, st.values.copy()))
    return st


def discrete_energy(state: EvolutionState) -> float:
    """The energy that the semi-discrete scheme dissipates exactly."""
    g, v, p = state.grid, state.values, state.params.p
    ss = 1.0 if state.frame is Frame.selfsimilar else 0.0
    F = ss * v * v / (2 * (p - 1)) - np.abs(v) ** (p + 1) / (p + 1)
    return float(0.5 * np.sum(g.flux_coef * np.diff(v) ** 2) + np.sum(g.volumes * F))


def z_vs_phi_inf(state: EvolutionState) -> int | None:
    if state.params.L is None:
        return None
    r = state.grid.rho[1:]
    return sign_changes(state.values[1:] * r ** state.params.m - state.params.L)


def _history_row(state):
    return HistoryRow(state.time, state.sup_norm, discrete_energy(state), z_vs_phi_inf(state))


def evolve(initial: EvolutionState, until: float, *, rtol: float = 1e-8, atol: float = 1e-11,
           n_out: int = 50, output_times=None, blowup_level: float = BLOWUP_LEVEL,
           record_growth: float = GROWTH_RECORD, max_steps: int = 50_000_000,
           variant=None) -> EvolutionState:
    """Advance to ``until`` and return a new state with history appended.

    History rows and snapshots are stored at the output times and whenever
    the sup norm has grown by ``record_growth`` since the last row, so that
    blowup runs leave a dense record.  On a blowup event (sup > blowup_level
    or exhausted time resolution while growing) the state is returned early
    with ``status == "blowup"``.
    """
    if not until > initial.time:
        raise ValueError("until must exceed the current time")
    st = initial.copy()
    kern = (variant or kernels.active).mol_stepper
    g = st.grid
    n_active = g.n - 1 if st.bc is BC.pinned else g.n
    ss = 1.0 if st.frame is Frame.selfsimilar else 0.0
    inv_vol = 1.0 / g.volumes
    dt_max = g.stable_dt()
    if output_times is None:
        output_times = np.linspace(st.time, until, n_out + 1)[1:]
    outs = [float(t) for t in output_times if st.time < t <= until]
    dt = dt_max
    total_steps = total_rejects = 0
    st.status = "running"
    for t_out in outs:
        while st.time < t_out:
            t, dt, status, steps, rejects = kern(
                st.values, st.time, t_out, dt, dt_max, g.flux_coef, inv_vol, n_active, st.params.p, ss,
                st.bc is BC.pinned, rtol, atol, blowup_level, record_growth, max_steps)
            st.time = float(t)
            total_steps += steps
            total_rejects += rejects
            if status == kernels.MOL_GROWTH:
                _record(st)
                continue
            if status in (kernels.MOL_BLOWUP, kernels.MOL_TIME_UNDERFLOW):
                _record(st)
                st.status = "blowup"
                st.stats.update(steps=total_steps, rejects=total_rejects)
                return st
            if status == kernels.MOL_POSITIVITY:
                raise PositivityFailure(f"positivity lost at time {st.time:.6g}")
            if status == kernels.MOL_MAX_STEPS:
                raise RuntimeError("step budget exhausted")
        _record(st)
    st.status = "done"
    st.stats.update(steps=total_steps, rejects=total_rejects)
    return st


def _record(st):
    if st.history and st.history[-1].time == st.time:
        return
    st.history.append(_history_row(st))
    st.snapshots.append((st.time, st.values.copy()))


# ---------------------------------------------------------------- frames

def to_selfsimilar(u_state: EvolutionState, T: float, grid: Grid | None = None) -> EvolutionState:
    """v(y, s) = (T−t)^{1/(p−1)} u(y√(T−t), t), s = −log(T−t).

    Without ``grid`` the nodes are mapped exactly (R → R/√(T−t)); with a
    target grid the mapped profile is resampled by cubic spline.
    """
    if u_state.frame is not Frame.physical:
        raise ValueError("expected a physical-frame state")
    tau = T - u_state.time
    if not tau > 0:
        raise ValueError("need t < T")
    p = u_state.params.p
    vals = tau ** (1 / (p - 1)) * u_state.values
    mapped = Grid.build(u_state.grid.R / math.sqrt(tau), u_state.grid.n, u_state.params.N, Frame.selfsimilar)
    out = EvolutionState(Frame.selfsimilar, mapped, vals, -math.log(tau), u_state.params, u_state.bc)
    return _resample(out, grid) if grid is not None else out


def from_selfsimilar(v_state: EvolutionState, T: float, grid: Grid | None = None) -> EvolutionState:
    """Inverse of :func:`to_selfsimilar`."""
    if v_state.frame is not Frame.selfsimilar:
        raise ValueError("expected a selfsimilar-frame state")
    tau = math.exp(-v_state.time)
    p = v_state.params.p
    vals = tau ** (-1 / (p - 1)) * v_state.values
    mapped = Grid.build(v_state.grid.R * math.sqrt(tau), v_state.grid.n, v_state.params.N, Frame.physical)
    out = EvolutionState(Frame.physical, mapped, vals, T - tau, v_state.params, v_state.bc)
    return _resample(out, grid) if grid is not None else out


def _resample(state: EvolutionState, grid: Grid) -> EvolutionState:
    if grid.R > state.grid.R * (1 + 1e-12):
        raise ValueError("target grid extends beyond the mapped domain")
    spline = CubicSpline(state.grid.rho, state.values, bc_type=((1, 0.0), "not-a-knot"))
    return replace(state, grid=grid, values=np.maximum(spline(grid.rho), 0.0))


# ---------------------------------------------------------------- limits

@dataclass
class LimitVerdict:
    verdict: str
    distance: float
    distances: tuple


def detect_limit(state: EvolutionState, atlas=(), frame=None) -> LimitVerdict:
    """Nearest steady state in sup norm on [h, R/2], or ``undecided``.

    Candidates are 0, κ, φ∞ and the atlas members.  A verdict needs distance
    below 1e-3 and distances decreasing over the last three snapshots.
    """
    frame = Frame(frame or state.frame)
    if frame is not Frame.selfsimilar:
        raise ValueError("limits are detected in the selfsimilar frame")
    span = state.history[-1].time - state.history[0].time if state.history else 0.0
    g = state.grid
    mask = (g.rho > 0) & (g.rho <= g.R / 2)
    r = g.rho[mask]
    params = state.params
    cands = {"0": np.zeros_like(r), "kappa": np.full_like(r, params.kappa)}
    if params.L is not None:
        cands["phi_inf"] = params.phi_inf(r)
    for i, st in enumerate(atlas):
        cands[f"atlas[{i}]"] = st.value(r)
    snaps = state.snapshots[-3:]
    dist = {k: [float(np.max(np.abs(s[1][mask] - c))) for s in snaps] for k, c in cands.items()}
    best = min(dist, key=lambda k: dist[k][-1])
    d = dist[best]
    ok = span >= 5.0 and d[-1] < 1e-3 and len(d) == 3 and d[0] > d[1] > d[2] or (d[-1] == 0.0)
    return LimitVerdict(best if ok else "undecided", d[-1], tuple(d))


# ---------------------------------------------------------------- blowup

class BlowupType(str, enum.Enum):
    type_I = "type_I"
    type_II_suspect = "type_II_suspect"
    none = "none"


@dataclass
class BlowupReport:
    T_est: float | None
    type: BlowupType
    times: np.ndarray
    sup: np.ndarray
    rate: np.ndarray
    window_variation: float | None = None
    profiles: list = field(default_factory=list)


def classify_blowup(run: EvolutionState, *, fit_points: int = 10, min_samples: int = 30) -> BlowupReport:
    """Blowup time and type from the sup-norm history of a physical run.

    T_est comes from a linear fit of sup^{1−p} against t over the last
    ``fit_points`` rows.  The rate series (T_est − t)^{1/(p−1)} sup is
    examined on its last decade in T_est − t, restricted to samples whose
    distance to T_est is resolved in double precision.
    """
    t = np.array([h.time for h in run.history])
    sup = np.array([h.sup_norm for h in run.history])
    if run.status != "blowup":
        return BlowupReport(None, BlowupType.none, t, sup, np.full_like(t, np.nan))
    if t.size < min_samples:
        raise InsufficientWindow(f"only {t.size} samples precede the event (need {min_samples})")
    p = run.params.p
    y = sup ** (1 - p)
    k = min(fit_points, t.size)
    slope, icpt = np.polyfit(t[-k:] - t[-1], y[-k:], 1)
    if not slope < 0:
        return BlowupReport(None, BlowupType.type_II_suspect, t, sup, np.full_like(t, np.nan))
    T_est = float(t[-1] - icpt / slope)
    tau = T_est - t
    rate = np.where(tau > 0, np.abs(tau) ** (1 / (p - 1)) * sup, np.nan)
    # T_est is only known to the integration tolerance; very small T_est − t is noise
    resolved = tau > 1e-6 * max(1.0, abs(T_est))
    if not np.any(resolved):
        return BlowupReport(T_est, BlowupType.type_II_suspect, t, sup, rate)
    tmin = tau[resolved].min()
    win = resolved & (tau <= 10 * tmin)
    seg = rate[win]
    var = float((seg.max() - seg.min()) / seg.mean())
    kappa = run.params.kappa
    kind = BlowupType.type_I if (win.sum() >= 3 and var < 0.2 and seg.max() < 10 * kappa) else BlowupType.type_II_suspect
    return BlowupReport(T_est, kind, t, sup, rate, var)


@dataclass
class RadialProfile:
    """A sampled radial function with cubic-spline interpolation."""

    rho: np.ndarray
    values: np.ndarray
    derivative: np.ndarray | None = None

    def __call__(self, r):
        spline = CubicSpline(self.rho, self.values, bc_type=((1, 0.0), "not-a-knot"))
        return spline(r)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def rescaled_profile(profile, params: ProblemParams) -> RadialProfile:
    """r ↦ λ^{2/(p−1)} u(λr) with λ = ‖u‖_∞^{−(p−1)/2}; the result has sup 1.

    ``profile`` is a RadialProfile, an EvolutionState snapshot (state, index)
    or a pair (rho, values).
    """
    if isinstance(profile, RadialProfile):
        rho, vals = profile.rho, profile.values
    else:
        rho, vals = (np.asarray(a, dtype=float) for a in profile)
    sup = float(np.max(np.abs(vals)))
    if not sup > 0:
        raise ValueError("profile vanishes identically")
    m = params.m
    lam = sup ** (-(params.p - 1) / 2)
    return RadialProfile(rho / lam, vals * lam ** m)


def snapshot_profile(run: EvolutionState, t_k: float) -> RadialProfile:
    """The stored snapshot closest to t_k."""
    times = np.array([s[0] for s in run.snapshots])
    i = int(np.argmin(np.abs(times - t_k)))
    return RadialProfile(run.grid.rho.copy(), run.snapshots[i][1].copy())


def universal_bound_check(state: EvolutionState, T: float = math.inf) -> float:
    """Smallest C with u + |u_r|^{2/(p+1)} + |u_rr|^{1/p} ≤ C (r^{−2/(p−1)} + m(t)) on the history.

    m(t) = (T − t)^{−1/(p−1)} for finite T and 0 otherwise; derivatives are
    centered differences on the interior nodes.
    """
    if state.frame is not Frame.physical:
        raise ValueError("the universal bound is stated in the physical frame")
    p, m = state.params.p, state.params.m
    r = state.grid.rho
    h = state.grid.h
    C = 0.0
    for t, u in state.snapshots:
        ur = (u[2:] - u[:-2]) / (2 * h)
        urr = (u[2:] - 2 * u[1:-1] + u[:-2]) / (h * h)
        lhs = u[1:-1] + np.abs(ur) ** (2 / (p + 1)) + np.abs(urr) ** (1 / p)
        mt = (T - t) ** (-1 / (p - 1)) if math.isfinite(T) else 0.0
        C = max(C, float(np.max(lhs / (r[1:-1] ** (-m) + mt))))
    return C


# ---------------------------------------------------------------- output

SERIES_COLUMNS = ("time", "sup_norm", "energy", "z_vs_phi_inf", "rate")


def write_series_csv(path, state: EvolutionState, rate=None) -> None:
    rows = []
    for i, h in enumerate(state.history):
        r = None if rate is None or not np.isfinite(rate[i]) else rate[i]
        rows.append((h.time, h.sup_norm, h.energy, h.z_vs_phi_inf, r))
    atomic_csv(path, SERIES_COLUMNS, rows)


def write_snapshot_csv(path, rho, values) -> None:
    atomic_csv(path, ("rho", "value"), zip(rho, values))


def write_series_svg(path, state: EvolutionState, title: str = "") -> None:
    """Sup norm and energy against time, plus the last few profiles."""
    from .plotting import series_figure

    series_figure(path, state, title)
