"""Critical exponents and derived constants for u_t = Δu + u^p in R^N."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

REL_TOL = 1e-12


class ParameterDomainError(ValueError):
    """Raised when (N, p) or another argument is outside an operation's domain."""


class AbsentConstantError(ParameterDomainError):
    """Raised when a constant is requested in a regime where it is undefined."""


@functools.total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    """A real number or +infinity, tagged explicitly."""

    value: float = 0.0
    infinite: bool = False

    @classmethod
    def inf(cls) -> "ExtendedReal":
        return cls(0.0, True)

    @classmethod
    def of(cls, x) -> "ExtendedReal":
        if isinstance(x, ExtendedReal):
            return x
        if math.isinf(x) and x > 0:
            return cls.inf()
        if math.isnan(x) or math.isinf(x):
            raise ValueError(f"not an extended real: {x!r}")
        return cls(float(x), False)

    @property
    def finite(self) -> bool:
        return not self.infinite

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def _key(self):
        return (1, 0.0) if self.infinite else (0, self.value)

    def __eq__(self, other):
        try:
            other = ExtendedReal.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        try:
            other = ExtendedReal.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "+inf" if self.infinite else repr(self.value)

    def __format__(self, spec):
        return "inf" if self.infinite else format(self.value, spec)


INF = ExtendedReal.inf()


def sobolev_exponent(N: int) -> ExtendedReal:
    return ExtendedReal.of((N + 2) / (N - 2)) if N > 2 else INF


def fujita_entire_exponent(N: int) -> ExtendedReal:
    return ExtendedReal.of(N * (N + 2) / (N - 1) ** 2) if N > 2 else INF


def joseph_lundgren_exponent(N: int) -> ExtendedReal:
    if N <= 10:
        return INF
    return ExtendedReal.of(1 + 4 * (N - 4 + 2 * math.sqrt(N - 1)) / ((N - 2) * (N - 10)))


def lepin_exponent(N: int) -> ExtendedReal:
    return ExtendedReal.of(1 + 6 / (N - 10)) if N > 10 else INF


def remainder_exponent(N: int) -> ExtendedReal:
    """p_H, above which the remainder estimates work with zero smoothing index.

    The denominator N² − 12N + 16 is positive only for N ≥ 11.
    """
    if N <= 10:
        return INF
    return ExtendedReal.of(1 + 4 * (N + 2 * math.sqrt(N) - 4) / (N * N - 12 * N + 16))


def regime(p: float, critical: ExtendedReal, rel_tol: float = REL_TOL) -> str:
    """Classify p against a critical exponent: 'sub', 'critical' or 'super'."""
    if critical.infinite:
        return "sub"
    c = critical.value
    if abs(p - c) <= rel_tol * max(abs(c), 1.0):
        return "critical"
    return "sub" if p < c else "super"


@dataclass(frozen=True)
class ProblemParams:
    """Dimension N, exponent p and every constant derived from them.

    Constants that do not exist in the current regime are ``None``.
    """

    N: int
    p: float
    pS: ExtendedReal = field(init=False)
    pStar: ExtendedReal = field(init=False)
    pJL: ExtendedReal = field(init=False)
    pL: ExtendedReal = field(init=False)
    pH: ExtendedReal = field(init=False)
    kappa: float = field(init=False)
    L: float | None = field(init=False)
    beta: float | None = field(init=False)
    cComp: float = field(init=False)
    deltaComp: float = field(init=False)
    xi: float = field(init=False)

    def __post_init__(self):
        N, p = self.N, self.p
        if not isinstance(N, int) or isinstance(N, bool) or N < 3:
            raise ParameterDomainError(f"dimension must be an integer >= 3, got {N!r}")
        if not (isinstance(p, (int, float)) and math.isfinite(p)) or p <= 1:
            raise ParameterDomainError(f"exponent must be a finite real > 1, got {p!r}")
        p = float(p)
        s = object.__setattr__
        s(self, "p", p)
        s(self, "pS", sobolev_exponent(N))
        s(self, "pStar", fujita_entire_exponent(N))
        s(self, "pJL", joseph_lundgren_exponent(N))
        s(self, "pL", lepin_exponent(N))
        s(self, "pH", remainder_exponent(N))
        s(self, "kappa", (p - 1) ** (-1 / (p - 1)))
        s(self, "cComp", (1 / (2 * p * (p - 1))) ** (1 / (p - 1)))
        s(self, "deltaComp", 1 / (2 * (p - 1)))
        s(self, "xi", (p + 1) / (p - 1))

        L = None
        if p * (N - 2) > N:
            L = (2 * ((N - 2) * p - N) / (p - 1) ** 2) ** (1 / (p - 1))
        s(self, "L", L)

        beta = None
        if L is not None and regime(p, self.pJL) != "sub":
            disc = (N - 2) ** 2 - 4 * p * L ** (p - 1)
            if regime(p, self.pJL) == "critical":
                disc = max(disc, 0.0)
            if disc >= 0:
                beta = 0.5 * (-(N - 2) + math.sqrt(disc))
        s(self, "beta", beta)

    @property
    def m(self) -> float:
        """Decay exponent 2/(p−1) of the singular steady state."""
        return 2.0 / (self.p - 1)

    @property
    def discriminant(self) -> float | None:
        if self.L is None:
            return None
        return (self.N - 2) ** 2 - 4 * self.p * self.L ** (self.p - 1)

    @property
    def beta2(self) -> float | None:
        """The second (more negative) indicial root at the singular state."""
        if self.beta is None:
            return None
        return -(self.N - 2) - self.beta

    def require_L(self) -> float:
        if self.L is None:
            raise AbsentConstantError(f"singular steady state needs p(N-2) > N; N={self.N}, p={self.p}")
        return self.L

    def require_beta(self) -> float:
        if self.beta is None:
            raise AbsentConstantError(f"beta is defined only for p >= pJL; N={self.N}, p={self.p}, pJL={self.pJL}")
        return self.beta

    def phi_inf(self, r):
        """Singular steady state L r^{-2/(p-1)}."""
        return self.require_L() * r ** (-self.m)


def make_params(N: int, p: float) -> ProblemParams:
    return ProblemParams(N, p)


def mu(params: ProblemParams, j: int) -> float:
    """Eigenvalue μ_j of the linearization at the singular steady state."""
    if j < 0:
        raise ParameterDomainError("eigenvalue index must be nonnegative")
    beta = params.require_beta()
    return -(beta / 2 + 1 / (params.p - 1) + j)


def exponent_table(N: int) -> dict[str, ExtendedReal]:
    if not isinstance(N, int) or N < 3:
        raise ParameterDomainError(f"dimension must be an integer >= 3, got {N!r}")
    return {
        "pS": sobolev_exponent(N),
        "pStar": fujita_entire_exponent(N),
        "pJL": joseph_lundgren_exponent(N),
        "pL": lepin_exponent(N),
        "pH": remainder_exponent(N),
    }
