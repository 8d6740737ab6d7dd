"""Numeric foundation: Hecke-group constants, Möbius matrices and the B_n sequence."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

#: Default comparison tolerance; overridable through the ``ROSEN_TOL`` environment variable.
DEFAULT_TOL = float(os.environ.get("ROSEN_TOL", "1e-9"))

#: Endpoints closer than this are treated as the same point.
SNAP_EPS = 1e-12


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def lambda_of(q: int) -> float:
    """Return ``2 cos(pi/q)``, the translation length of the Hecke group G_q."""
    if int(q) != q or q < 3:
        raise DomainError(f"q must be an integer >= 3, got {q!r}")
    if q == 3:
        return 1.0
    if q == 4:
        return math.sqrt(2.0)
    if q == 6:
        return math.sqrt(3.0)
    return 2.0 * math.cos(math.pi / q)


@dataclass(frozen=True)
class Params:
    """Index ``q`` and parameter ``alpha``; ``lam`` is derived."""

    q: int
    alpha: float
    lam: float = field(init=False)

    def __post_init__(self):
        lam = lambda_of(self.q)
        object.__setattr__(self, "lam", lam)
        if not 0.0 <= self.alpha or self.alpha * lam > 1.0 + 1e-12:
            raise DomainError(f"alpha must lie in [0, 1/lambda], got {self.alpha!r} for q={self.q}")

    @property
    def lo(self) -> float:
        """Left endpoint ``l_0 = lambda (alpha - 1)`` of the interval of definition."""
        return self.lam * (self.alpha - 1.0)

    @property
    def hi(self) -> float:
        """Right endpoint ``r_0 = lambda alpha`` (excluded)."""
        return self.lam * self.alpha

    def with_alpha(self, alpha: float) -> "Params":
        return Params(self.q, alpha)


@dataclass(frozen=True)
class Mobius:
    """2x2 real matrix acting by fractional linear transformation."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.det == 0:
            raise DomainError("singular Möbius matrix")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Mobius") -> "Mobius":
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __call__(self, x: float) -> float:
        return mobius_apply(self, x)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def is_projective_identity(self, tol: float = DEFAULT_TOL) -> bool:
        """True when the matrix is a nonzero scalar multiple of the identity."""
        scale = max(abs(self.a), abs(self.d))
        return (
            abs(self.b) <= tol * scale
            and abs(self.c) <= tol * scale
            and abs(self.a - self.d) <= tol * scale
        )


IDENTITY = Mobius(1.0, 0.0, 0.0, 1.0)


def mobius_apply(m: Mobius, x: float) -> float:
    """Fractional linear action on the extended real line; ``inf`` is a value."""
    if math.isinf(x):
        return INF if m.c == 0 else m.a / m.c
    den = m.c * x + m.d
    if den == 0:
        return INF
    return (m.a * x + m.b) / den


def s_matrix(q: int) -> Mobius:
    return Mobius(1.0, lambda_of(q), 0.0, 1.0)


T_MATRIX = Mobius(0.0, -1.0, 1.0, 0.0)


def u_matrix(q: int) -> Mobius:
    return Mobius(lambda_of(q), -1.0, 1.0, 0.0)


def b_seq(q: int, n: int) -> np.ndarray:
    """Return ``B_0..B_n`` with ``B_0 = 0, B_1 = 1, B_k = lambda B_{k-1} - B_{k-2}``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    lam = lambda_of(q)
    out = np.empty(n + 1)
    out[0], out[1] = 0.0, 1.0
    for k in range(2, n + 1):
        out[k] = lam * out[k - 1] - out[k - 2]
    return out


def u_power(q: int, n: int) -> Mobius:
    """``U^n`` written through the B-sequence: ``[[B_{n+1}, -B_n], [B_n, -B_{n-1}]]``."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n == 0:
        return IDENTITY
    b = b_seq(q, n + 1)
    return Mobius(b[n + 1], -b[n], b[n], -b[n - 1])
