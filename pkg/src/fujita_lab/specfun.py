"""Gamma, log-gamma, digamma and terminating Kummer polynomials M(-j, b, z)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2 * math.pi)


class PoleError(ValueError):
    """Argument is a pole of the function."""


def _lanczos_sum(x: float) -> float:
    # x is the shifted argument (z - 1)
    a = _LANCZOS[0]
    for i in range(1, 9):
        a += _LANCZOS[i] / (x + i)
    return a


def gamma(x: float) -> float:
    """Γ(x) for real x that is not a nonpositive integer."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x < 0.5:
        # reflection
        return math.pi / (math.sin(math.pi * x) * gamma(1 - x))
    if x == math.floor(x) and x <= 171:
        return float(math.factorial(int(x) - 1))
    z = x - 1
    t = z + _LANCZOS_G + 0.5
    # split the power so that x up to ~171 does not overflow
    half = t ** ((z + 0.5) / 2)
    return _SQRT_2PI * half * (half * math.exp(-t)) * _lanczos_sum(z)


def lgamma(x: float) -> float:
    """log|Γ(x)|."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"log-gamma has a pole at {x}")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - lgamma(1 - x)
    z = x - 1
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


# Bernoulli numbers B_2k / (2k) for the asymptotic digamma series
_DIGAMMA_ASYMP = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)


def digamma(z: float) -> float:
    """ψ(z) = Γ'(z)/Γ(z) for z > 0."""
    z = float(z)
    if not z > 0:
        raise ValueError(f"digamma is implemented for z > 0 only, got {z}")
    acc = 0.0
    while z < 10.0:
        acc -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series = 0.0
    pw = inv2
    for c in _DIGAMMA_ASYMP:
        series += c * pw
        pw *= inv2
    return acc + math.log(z) - 0.5 / z - series


@dataclass(frozen=True)
class KummerPoly:
    """The terminating confluent hypergeometric series M(-j, b, z).

    ``coefficients[k]`` multiplies z**k.
    """

    j: int
    b: float
    coefficients: tuple

    @classmethod
    def build(cls, j: int, b: float) -> "KummerPoly":
        if j < 0:
            raise ValueError("degree must be nonnegative")
        if not b > 0:
            raise ValueError(f"Kummer parameter b must be positive, got {b}")
        c = [1.0]
        for k in range(j):
            # (-j)_{k+1}/(b)_{k+1}/(k+1)! from the k-th term
            c.append(c[-1] * (k - j) / ((b + k) * (k + 1)))
        return cls(j, float(b), tuple(c))

    def __call__(self, z, nu: int = 0):
        return kummer_eval(self, z, nu)

    def derivative_coefficients(self, nu: int = 1) -> np.ndarray:
        c = np.asarray(self.coefficients, dtype=float)
        for _ in range(nu):
            c = c[1:] * np.arange(1, c.size) if c.size > 1 else np.zeros(1)
        return c

    def roots(self) -> np.ndarray:
        """Real positive roots, refined by bisection on sign changes."""
        from .zeronum import zero_number

        if self.j == 0:
            return np.empty(0)
        # all roots of the Laguerre-type polynomial lie below 4j + 2b + 2
        upper = 4.0 * self.j + 2.0 * self.b + 10.0
        zc = zero_number(lambda z: kummer_eval(self, z), (0.0, upper), n_coarse=400 * self.j + 400)
        return np.asarray(zc.crossing_locations)


def kummer_eval(poly: KummerPoly, z, nu: int = 0):
    """Horner evaluation of M(-j, b, z) or its ``nu``-th derivative in z."""
    c = poly.derivative_coefficients(nu) if nu else poly.coefficients
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z) + c[-1]
    for ck in reversed(c[:-1]):
        out = out * z + ck
    return out if out.ndim else float(out)
