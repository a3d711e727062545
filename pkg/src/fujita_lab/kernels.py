"""Hot loops: the radial Dormand-Prince integrator and the method-of-lines stepper.

Both kernels are plain Python written in the numba subset.  ``_accel.njit``
compiles them unless ``FUJITA_LAB_NUMBA=0``; the same source then runs as a
pure Python / numpy fallback.  ``numpy_variant`` and ``numba_variant`` expose
both flavours explicitly for the benchmark and the parity tests.
"""
import math

import numpy as np

from . import _accel

# termination codes shared with odecore
REACHED_RMAX = 0
HIT_ZERO = 1
BLEW_UP = 2
STIFF_FAILURE = 3
MAX_STEPS = 4

# method-of-lines stepper status codes
MOL_DONE = 0
MOL_BLOWUP = 2
MOL_TIME_UNDERFLOW = 3
MOL_MAX_STEPS = 4
MOL_POSITIVITY = 5
MOL_GROWTH = 6

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense output (Hairer's contd5)
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423


def _radial_rhs(rho, w, dw, n_dim, p, ss):
    # w'' = -((N-1)/rho - ss*rho/2) w' + ss*w/(p-1) - |w|^(p-1) w
    aw = abs(w)
    src = ss * w / (p - 1.0) - aw ** (p - 1.0) * w
    return dw, -((n_dim - 1.0) / rho - 0.5 * ss * rho) * dw + src


def _dopri_radial(n_dim, p, ss, rho0, w0, dw0, rmax, rtol, atol, h0, blow, hmin, max_steps):
    """Integrate the radial steady ODE from rho0 to rmax.

    Returns (n, knots, rcont, status): ``knots[:n+1]`` are accepted step
    boundaries and ``rcont[:n]`` the five dense-output coefficient pairs of
    each step (component 0 is w, 1 is w').
    """
    cap = 256
    knots = np.empty(cap + 1)
    rcont = np.empty((cap, 5, 2))
    knots[0] = rho0
    x = rho0
    y0 = w0
    y1 = dw0
    f0, f1 = _radial_rhs(x, y0, y1, n_dim, p, ss)
    h = h0
    n = 0
    status = MAX_STEPS
    fac_max = 10.0
    for _ in range(max_steps):
        if x >= rmax:
            status = REACHED_RMAX
            break
        if h < hmin * max(1.0, x):
            status = STIFF_FAILURE
            break
        if x + h > rmax:
            h = rmax - x
        k1a, k1b = f0, f1
        k2a, k2b = _radial_rhs(x + _C2 * h, y0 + h * _A21 * k1a, y1 + h * _A21 * k1b, n_dim, p, ss)
        k3a, k3b = _radial_rhs(x + _C3 * h, y0 + h * (_A31 * k1a + _A32 * k2a),
                               y1 + h * (_A31 * k1b + _A32 * k2b), n_dim, p, ss)
        k4a, k4b = _radial_rhs(x + _C4 * h, y0 + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a),
                               y1 + h * (_A41 * k1b + _A42 * k2b + _A43 * k3b), n_dim, p, ss)
        k5a, k5b = _radial_rhs(x + _C5 * h,
                               y0 + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a),
                               y1 + h * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b), n_dim, p, ss)
        k6a, k6b = _radial_rhs(x + h,
                               y0 + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a),
                               y1 + h * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b),
                               n_dim, p, ss)
        z0 = y0 + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        z1 = y1 + h * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        k7a, k7b = _radial_rhs(x + h, z0, z1, n_dim, p, ss)
        e0 = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        e1 = h * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)
        sc0 = atol + rtol * max(abs(y0), abs(z0))
        sc1 = atol + rtol * max(abs(y1), abs(z1))
        err = math.sqrt(0.5 * ((e0 / sc0) ** 2 + (e1 / sc1) ** 2))
        if not (err <= 1.0) or not math.isfinite(z0) or not math.isfinite(z1):
            if math.isfinite(err):
                h = h * max(0.2, 0.9 * err ** -0.2)
            else:
                h = 0.2 * h
            fac_max = 1.0
            continue
        if n == cap:
            new_cap = 2 * cap
            nk = np.empty(new_cap + 1)
            nk[: cap + 1] = knots[: cap + 1]
            nr = np.empty((new_cap, 5, 2))
            nr[:cap] = rcont[:cap]
            knots = nk
            rcont = nr
            cap = new_cap
        # dense output coefficients
        d0 = z0 - y0
        d1 = z1 - y1
        bs0 = h * k1a - d0
        bs1 = h * k1b - d1
        rcont[n, 0, 0] = y0
        rcont[n, 0, 1] = y1
        rcont[n, 1, 0] = d0
        rcont[n, 1, 1] = d1
        rcont[n, 2, 0] = bs0
        rcont[n, 2, 1] = bs1
        rcont[n, 3, 0] = d0 - h * k7a - bs0
        rcont[n, 3, 1] = d1 - h * k7b - bs1
        rcont[n, 4, 0] = h * (_D1 * k1a + _D3 * k3a + _D4 * k4a + _D5 * k5a + _D6 * k6a + _D7 * k7a)
        rcont[n, 4, 1] = h * (_D1 * k1b + _D3 * k3b + _D4 * k4b + _D5 * k5b + _D6 * k6b + _D7 * k7b)
        x_old = x
        x = x + h
        if x > rmax or rmax - x < 1e-14 * rmax:
            x = rmax
        knots[n + 1] = x
        n += 1
        crossed = (y0 > 0.0 and z0 <= 0.0) or (y0 < 0.0 and z0 >= 0.0)
        y0, y1 = z0, z1
        f0, f1 = k7a, k7b
        if crossed:
            status = HIT_ZERO
            break
        if abs(y0) > blow:
            status = BLEW_UP
            break
        fac = min(fac_max, max(0.2, 0.9 * max(err, 1e-10) ** -0.2))
        fac_max = 10.0
        h = h * fac
        if x_old == x:
            status = STIFF_FAILURE
            break
    return n, knots[: n + 1].copy(), rcont[:n].copy(), status


# ---------------------------------------------------------------------------
# Method of lines: finite-volume discretization of (1/a)(a v_r)_r + reaction


def _mol_rhs_loop(v, out, flux_coef, inv_vol, n_active, p, ss, pinned):
    n = v.size
    for i in range(n_active):
        acc = 0.0
        if i + 1 < n:
            acc += flux_coef[i] * (v[i + 1] - v[i])
        if i > 0:
            acc -= flux_coef[i - 1] * (v[i] - v[i - 1])
        vi = v[i]
        out[i] = acc * inv_vol[i] - ss * vi / (p - 1.0) + abs(vi) ** (p - 1.0) * vi
    for i in range(n_active, n):
        out[i] = 0.0


def _mol_rhs_vec(v, out, flux_coef, inv_vol, n_active, p, ss, pinned):
    n = v.size
    flux = flux_coef * (v[1:] - v[:-1])
    div = np.zeros(n)
    div[:-1] += flux
    div[1:] -= flux
    out[:] = div * inv_vol - ss * v / (p - 1.0) + np.abs(v) ** (p - 1.0) * v
    out[n_active:] = 0.0


def _step_error_loop(h, k1, k2, k3, k4, v, y_new, rtol, atol, neg_tol):
    err = 0.0
    negative = False
    for i in range(v.size):
        e = h * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i] - 1.0 / 8.0 * k4[i])
        sc = atol + rtol * max(abs(v[i]), abs(y_new[i]))
        r = e / sc
        if r * r > err:
            err = r * r
        if y_new[i] < -neg_tol:
            negative = True
    return math.sqrt(err), negative


def _step_error_vec(h, k1, k2, k3, k4, v, y_new, rtol, atol, neg_tol):
    e = h * (-5.0 / 72.0 * k1 + 1.0 / 12.0 * k2 + 1.0 / 9.0 * k3 - 1.0 / 8.0 * k4)
    sc = atol + rtol * np.maximum(np.abs(v), np.abs(y_new))
    return float(np.max(np.abs(e / sc))), bool(np.any(y_new < -neg_tol))


def _make_mol_stepper(rhs, step_error):
    # Bogacki-Shampine 3(2), FSAL, with a stability cap on the step size
    def run(v, t, t_end, dt, dt_max, flux_coef, inv_vol, n_active, p, ss, pinned,
            rtol, atol, blow, grow_stop, max_steps):
        n = v.size
        k1 = np.empty(n)
        k2 = np.empty(n)
        k3 = np.empty(n)
        k4 = np.empty(n)
        tmp = np.empty(n)
        y_new = np.empty(n)
        rhs(v, k1, flux_coef, inv_vol, n_active, p, ss, pinned)
        status = 0
        steps = 0
        rejects = 0
        halvings = 0
        sup0 = np.max(np.abs(v))
        while t < t_end:
            if steps >= max_steps:
                status = 4
                break
            h = min(dt, dt_max, t_end - t)
            if t + h == t:
                # time resolution exhausted
                status = 3
                break
            tmp[:] = v + 0.5 * h * k1
            rhs(tmp, k2, flux_coef, inv_vol, n_active, p, ss, pinned)
            tmp[:] = v + 0.75 * h * k2
            rhs(tmp, k3, flux_coef, inv_vol, n_active, p, ss, pinned)
            y_new[:] = v + h * (2.0 / 9.0 * k1 + 1.0 / 3.0 * k2 + 4.0 / 9.0 * k3)
            rhs(y_new, k4, flux_coef, inv_vol, n_active, p, ss, pinned)
            err, negative = step_error(h, k1, k2, k3, k4, v, y_new, rtol, atol, 1e-14 * sup0)
            if negative:
                # positivity is a hard constraint
                halvings += 1
                dt = 0.5 * h
                if halvings > 20:
                    status = 5
                    break
                continue
            if not (err <= 1.0):
                rejects += 1
                dt = h * max(0.2, 0.9 * err ** (-1.0 / 3.0)) if math.isfinite(err) else 0.2 * h
                if dt < 1e-300:
                    status = 3
                    break
                continue
            halvings = 0
            v[:] = y_new
            k1[:] = k4
            t = t + h
            steps += 1
            dt = h * min(5.0, max(0.2, 0.9 * max(err, 1e-12) ** (-1.0 / 3.0)))
            sup = np.max(np.abs(v))
            if sup > blow:
                status = 2
                break
            if sup > grow_stop * sup0:
                status = 6
                break
        return t, dt, status, steps, rejects

    return run


_dopri_py = _dopri_radial
_mol_stepper_py = _make_mol_stepper(_mol_rhs_vec, _step_error_vec)


class _Variant:
    def __init__(self, dopri, mol_stepper, mol_rhs, name):
        self.dopri = dopri
        self.mol_stepper = mol_stepper
        self.mol_rhs = mol_rhs
        self.name = name


numpy_variant = _Variant(_dopri_py, _mol_stepper_py, _mol_rhs_vec, "numpy")

if _accel.HAVE_NUMBA:
    _radial_rhs_jit = _accel.numba.njit(cache=True, nogil=True, inline="always")(_radial_rhs)

    def _bind_dopri():
        globals_rhs = _radial_rhs_jit
        src_globals = dict(_dopri_radial.__globals__)
        src_globals["_radial_rhs"] = globals_rhs
        import types
        fn = types.FunctionType(_dopri_radial.__code__, src_globals, "_dopri_radial_jit")
        return _accel.numba.njit(nogil=True)(fn)

    _mol_rhs_jit = _accel.numba.njit(cache=True, nogil=True)(_mol_rhs_loop)
    _step_error_jit = _accel.numba.njit(cache=True, nogil=True)(_step_error_loop)
    numba_variant = _Variant(
        _bind_dopri(),
        _accel.numba.njit(nogil=True)(_make_mol_stepper(_mol_rhs_jit, _step_error_jit)),
        _mol_rhs_jit,
        "numba",
    )
else:  # pragma: no cover
    numba_variant = None

active = numba_variant if _accel.USE_NUMBA else numpy_variant
