"""Compare the numba kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Both variants are called
directly, so the FUJITA_LAB_NUMBA flag does not matter here.  The first numba
call is timed separately because it includes compilation.
"""
import time

import numpy as np

from fujita_lab import dynamics, kernels, make_params
from fujita_lab.odecore import RadialIVP, Frame


def shooting_sweep(variant, P, alphas):
    out = []
    for a in alphas:
        ivp = RadialIVP(P, Frame.selfsimilar, float(a))
        w0, dw0 = ivp.initial_state()
        n, knots, _, status = variant.dopri(float(P.N), P.p, 0.5, ivp.start_radius, w0, dw0, 40.0,
                                            1e-10, 1e-12, 1e-6, 1e8, 1e-14, 2_000_000)
        out.append((int(n), float(knots[n]), int(status)))
    return out


def mol_run(variant, P, n=300):
    st = dynamics.make_state(P, "selfsimilar", lambda r: (1 + r * r) ** (-P.m / 2), R=20.0, n=n)
    return dynamics.evolve(st, 2.0, n_out=10, variant=variant)


def timed(fn, *args, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    P = make_params(12, 5.0)
    alphas = np.linspace(0.6, 6.0, 32)
    if kernels.numba_variant is None:
        print("numba is not installed; only the numpy variant is available")
        return
    t0 = time.perf_counter()
    shooting_sweep(kernels.numba_variant, P, alphas[:1])
    mol_run(kernels.numba_variant, P, n=50)
    print(f"numba compile + first call: {time.perf_counter() - t0:.2f} s")
    print(f"{'case':<28}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, fn, args in (
        ("shooting sweep (32 shots)", shooting_sweep, (P, alphas)),
        ("method of lines (n=300)", mol_run, (P,)),
    ):
        tn, rn = timed(fn, kernels.numpy_variant, *args, repeat=1)
        tj, rj = timed(fn, kernels.numba_variant, *args)
        if name.startswith("shooting"):
            agree = max(abs(a[1] - b[1]) for a, b in zip(rn, rj))
        else:
            agree = float(np.max(np.abs(rn.values - rj.values)))
        print(f"{name:<28}{tn:>12.3f}{tj:>12.3f}{tn / tj:>10.1f}   max diff {agree:.1e}")


if __name__ == "__main__":
    main()
