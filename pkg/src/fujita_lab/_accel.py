"""Kernel acceleration switch.

Hot loops are written once in numba-compatible Python. When numba is
available and ``FUJITA_LAB_NUMBA`` is not ``0`` they are compiled with
``@njit``; otherwise the plain Python / numpy versions run.
"""
import os

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("FUJITA_LAB_NUMBA", "1") != "0"


def njit(fn):
    """Compile ``fn`` in nopython mode if acceleration is on, else return it."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def compile_closure(fn):
    # closures cannot use the on-disk cache
    if USE_NUMBA:
        return numba.njit(nogil=True)(fn)
    return fn


def worker_count():
    """Worker cap for parameter sweeps, from ``FUJITA_LAB_THREADS``."""
    env = os.environ.get("FUJITA_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1
