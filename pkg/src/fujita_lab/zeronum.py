"""Sturm zero number: sign changes of radial profiles and of their differences."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_ZERO = 1e-12
RESCAN_FACTOR = 8


class EndpointZeroError(ValueError):
    """The function vanishes (to tolerance) at an endpoint of the interval."""


class IdenticalProfilesError(ValueError):
    """The two compared profiles coincide, so their difference has no zero number."""


@dataclass(frozen=True)
class ZeroCount:
    interval: tuple
    count: int
    crossing_locations: tuple = field(default_factory=tuple)
    tangency_flag: bool = False
    tangency_locations: tuple = field(default_factory=tuple)
    infinite: bool = False


def _bisect(f, a, b, fa, tol):
    for _ in range(200):
        if b - a <= tol * max(1.0, abs(b)):
            break
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _sample_points(a, b, n, spacing):
    if spacing == "log":
        if a <= 0:
            raise ValueError("log spacing needs a positive left endpoint")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def _vectorized(f):
    def g(x):
        return np.asarray(f(x), dtype=float)
    return g


def zero_number(f, interval, n_coarse: int = 2000, tol_zero: float = TOL_ZERO,
                spacing: str = "uniform", xtol: float = 1e-12) -> ZeroCount:
    """Count sign changes of ``f`` on the open interval.

    ``f`` must accept numpy arrays.  The scan is coarse-then-refine: each
    coarse sign change is bisected to ``xtol``; cells where |f| comes within
    1e3·tol of zero without a sign change are rescanned 8× finer, and
    unresolved near-zeros are reported as tangencies, never counted.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("empty interval")
    fv = _vectorized(f)
    x = _sample_points(a, b, max(int(n_coarse), 3), spacing)
    y = fv(x)
    scale = float(np.max(np.abs(y)))
    if not np.all(np.isfinite(y)):
        raise ValueError("profile is not finite on the interval")
    thr = tol_zero * scale
    if abs(y[0]) <= thr or abs(y[-1]) <= thr:
        raise EndpointZeroError(f"profile vanishes at an endpoint of ({a}, {b})")

    def scalar(t):
        return float(fv(np.array([t]))[0])

    crossings = []
    tangencies = []
    s = np.sign(np.where(np.abs(y) <= thr, 0.0, y))
    nz = np.nonzero(s)[0]
    # sign changes between consecutive nonzero samples
    for i0, i1 in zip(nz[:-1], nz[1:]):
        if s[i0] != s[i1]:
            lo, hi = x[i0], x[i1]
            crossings.append(_bisect(scalar, lo, hi, y[i0], xtol))
    # suspicious cells: near-zero samples without a sign change
    near = np.nonzero(np.abs(y) < 1e3 * thr)[0]
    checked = set()
    for i in near:
        j0, j1 = max(i - 1, 0), min(i + 1, x.size - 1)
        if (j0, j1) in checked:
            continue
        checked.add((j0, j1))
        if s[j0] != 0 and s[j0] != s[j1] and s[j1] != 0:
            continue
        xf = np.linspace(x[j0], x[j1], RESCAN_FACTOR * (j1 - j0) + 1)
        yf = fv(xf)
        sf = np.sign(yf)
        pairs = np.nonzero(sf[:-1] * sf[1:] < 0)[0]
        new = [_bisect(scalar, xf[k], xf[k + 1], yf[k], xtol) for k in pairs]
        new = [c for c in new if all(abs(c - c0) > 10 * xtol * max(1.0, abs(c)) for c0 in crossings)]
        if new:
            crossings.extend(new)
        elif np.min(np.abs(yf)) < 1e3 * thr:
            tangencies.append(float(xf[int(np.argmin(np.abs(yf)))]))
    crossings = sorted(crossings)
    return ZeroCount((a, b), len(crossings), tuple(crossings), bool(tangencies), tuple(tangencies))


def intersection_number(f, g, interval, n_coarse: int = 2000, tol_zero: float = TOL_ZERO,
                        spacing: str = "uniform") -> ZeroCount:
    """Zero number of f − g."""
    a, b = float(interval[0]), float(interval[1])
    x = _sample_points(a, b, max(int(n_coarse), 3), spacing)
    fx = np.asarray(f(x), dtype=float)
    gx = np.asarray(g(x), dtype=float)
    scale = max(float(np.max(np.abs(fx))), float(np.max(np.abs(gx))), 1e-300)
    if np.max(np.abs(fx - gx)) < tol_zero * scale:
        raise IdenticalProfilesError("profiles coincide on the interval")
    return zero_number(lambda t: np.asarray(f(t), dtype=float) - np.asarray(g(t), dtype=float),
                       interval, n_coarse, tol_zero, spacing)


def sign_changes(values) -> int:
    """Sign changes of a sampled sequence, ignoring exact zeros."""
    v = np.asarray(values, dtype=float)
    s = np.sign(v[v != 0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def sign_change_locations(x, values) -> np.ndarray:
    """Linearly interpolated sign-change locations of a grid function."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v != 0
    xk, vk = x[keep], v[keep]
    idx = np.nonzero(np.sign(vk[1:]) != np.sign(vk[:-1]))[0]
    return xk[idx] - vk[idx] * (xk[idx + 1] - xk[idx]) / (vk[idx + 1] - vk[idx])
