"""The one-dimensional alpha-Rosen map, its digits, cylinders and endpoint orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .core import DomainError, Params, lambda_of

#: Orbit points closer to zero than this are declared to have terminated at 0.
ZERO_EPS = 1e-14
#: Slack allowed when checking membership of the half-open interval I_alpha.
DOMAIN_SLACK = 1e-12
#: Default tolerance for deciding l_k == r_k'.
SYNC_TOL = 1e-8


class ZeroOrbit(ArithmeticError):
    """The orbit reached 0, where no digit is defined."""


class Digit(NamedTuple):
    eps: int
    d: int

    def __str__(self):
        return f"({self.eps:+d}:{self.d})"


class Interval(NamedTuple):
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = False

    @property
    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.closed_lo and self.closed_hi))

    @property
    def length(self) -> float:
        return max(self.hi - self.lo, 0.0)

    def __contains__(self, x) -> bool:
        if self.empty:
            return False
        above = x >= self.lo if self.closed_lo else x > self.lo
        below = x <= self.hi if self.closed_hi else x < self.hi
        return above and below


EMPTY = Interval(0.0, 0.0, False, False)


def in_domain(p: Params, x: float, slack: float = DOMAIN_SLACK) -> bool:
    return p.lo - slack <= x < p.hi + slack


def _digit(lam: float, alpha: float, x: float) -> int:
    return math.floor(abs(1.0 / (lam * x)) + 1.0 - alpha)


def _step(lam: float, alpha: float, x: float) -> float:
    return abs(1.0 / x) - lam * _digit(lam, alpha, x)


def digit_of(p: Params, x: float) -> Digit:
    """Signed digit ``(sgn x, floor(|1/(lam x)| + 1 - alpha))`` of a nonzero point."""
    if x == 0 or abs(x) < ZERO_EPS:
        raise ZeroOrbit("x = 0 has no digit")
    if not in_domain(p, x):
        raise DomainError(f"x={x!r} outside [{p.lo}, {p.hi})")
    return Digit(1 if x > 0 else -1, _digit(p.lam, p.alpha, x))


def t_alpha(p: Params, x: float) -> float:
    """Apply ``T_alpha``; ``T_alpha(0) = 0``."""
    if not in_domain(p, x):
        raise DomainError(f"x={x!r} outside [{p.lo}, {p.hi})")
    if x == 0 or abs(x) < ZERO_EPS:
        return 0.0
    return _step(p.lam, p.alpha, x)


def delta_r(p: Params, r: int) -> float:
    """Cylinder boundary ``1/(lam (r + alpha))``."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    s = r + p.alpha
    return math.inf if s == 0 else 1.0 / (p.lam * s)


def cylinder_of(p: Params, eps: int, r: int) -> Interval:
    """The cylinder ``Delta(eps:r)`` clipped to I_alpha.

    Full positive cylinders are ``(delta_r, delta_{r-1}]``, negative ones
    ``[-delta_{r-1}, -delta_r)``, which is what the floor formula gives at the
    boundary points.
    """
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if eps not in (1, -1):
        raise DomainError(f"eps must be +1 or -1, got {eps}")
    inner, outer = delta_r(p, r), delta_r(p, r - 1)
    if eps > 0:
        hi, closed_hi = (outer, True) if outer < p.hi else (p.hi, False)
        iv = Interval(inner, hi, False, closed_hi)
    else:
        lo = -outer
        iv = Interval(lo, -inner, True, False) if lo >= p.lo else Interval(p.lo, -inner, True, False)
    return EMPTY if iv.empty else iv


def is_full_cylinder(p: Params, eps: int, r: int) -> bool:
    outer = delta_r(p, r - 1)
    return outer < p.hi if eps > 0 else -outer >= p.lo


def expand(p: Params, x: float, n: int) -> list[Digit]:
    """First ``n`` digits of ``x``; shorter when the orbit reaches 0."""
    out = []
    for _ in range(n):
        if abs(x) < ZERO_EPS:
            break
        dig = digit_of(p, x)
        out.append(dig)
        x = abs(1.0 / x) - p.lam * dig.d
    return out


@dataclass
class Orbit:
    points: list[float]
    digits: list[Digit]

    @property
    def terminated(self) -> bool:
        return len(self.points) > 0 and abs(self.points[-1]) < ZERO_EPS

    def __len__(self):
        return len(self.points)


def orbit(p: Params, x0: float, n: int) -> Orbit:
    """Points ``x_0..x_n`` (fewer if 0 is reached) and the digits of ``x_0..x_{n-1}``.

    The starting point may be ``r_0 = lam alpha``, which the formula handles
    even though it sits on the open end of I_alpha.
    """
    pts, digs = [x0], []
    x = x0
    for _ in range(n):
        if abs(x) < ZERO_EPS:
            pts[-1] = 0.0
            break
        d = _digit(p.lam, p.alpha, x)
        digs.append(Digit(1 if x > 0 else -1, d))
        x = abs(1.0 / x) - p.lam * d
        pts.append(x)
    if abs(pts[-1]) < ZERO_EPS:
        pts[-1] = 0.0
    return Orbit(pts, digs)


def endpoint_orbits(p: Params, n: int) -> tuple[Orbit, Orbit]:
    """Orbits of ``l_0 = lam(alpha - 1)`` and ``r_0 = lam alpha`` of length ``n + 1``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return orbit(p, p.lo, n), orbit(p, p.hi, n)


@dataclass
class SyncReport:
    k: int
    k_prime: int
    matched: bool
    residual: float
    digit_trace_l: list[Digit] = field(default_factory=list)
    digit_trace_r: list[Digit] = field(default_factory=list)
    digits_differ_by_one: bool = False

    @property
    def staggered(self) -> bool:
        return self.matched and self.k != self.k_prime

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "k_prime": self.k_prime,
            "matched": self.matched,
            "residual": self.residual,
            "digits_differ_by_one": self.digits_differ_by_one,
            "digit_trace_l": [list(d) for d in self.digit_trace_l],
            "digit_trace_r": [list(d) for d in self.digit_trace_r],
        }


def verify_orbit_sync(p: Params, max_steps: int, tol: float = SYNC_TOL) -> SyncReport:
    """Find the first ``(k, k')`` with ``l_k = r_k'`` whose predecessors' digits differ by one.

    Pairs are scanned by increasing ``k + k'``, then ``k``. Coincidental
    equalities whose predecessor digits do not differ by one (these occur at
    isolated alpha, e.g. q=3, alpha=(1+sqrt 5)/4 where l_1 = r_1) are skipped;
    if no synchronizing pair exists, the first coincidence is reported with
    ``digits_differ_by_one=False``.
    """
    lo, ro = endpoint_orbits(p, max_steps)
    best = None
    fallback = None
    for total in range(2, 2 * max_steps + 1):
        for k in range(max(1, total - max_steps), min(max_steps, total - 1) + 1):
            kp = total - k
            if k >= len(lo.points) or kp >= len(ro.points):
                continue
            res = abs(lo.points[k] - ro.points[kp])
            if res >= tol:
                continue
            dl, dr = lo.digits[k - 1], ro.digits[kp - 1]
            if abs(dl.d - dr.d) == 1:
                best = (k, kp, res, True)
                break
            if fallback is None:
                fallback = (k, kp, res, False)
        if best:
            break
    hit = best or fallback
    if hit is None:
        n = min(len(lo.points), len(ro.points)) - 1
        res = abs(lo.points[n] - ro.points[n])
        return SyncReport(n, n, False, res, lo.digits, ro.digits, False)
    k, kp, res, one = hit
    return SyncReport(k, kp, True, res, lo.digits[:k], ro.digits[:kp], one)


def alpha0(q: int) -> float:
    """Lower end of the connectivity interval (parity dependent)."""
    lam = lambda_of(q)
    if q % 2 == 0:
        return (lam**2 - 4 + math.sqrt((4 - lam**2) ** 2 + 4 * lam**2)) / (2 * lam**2)
    return (lam - 2 + math.sqrt(2 * lam**2 - 4 * lam + 4)) / lam**2


def omega0(q: int) -> float:
    """Upper end of the entropy plateau (``1/lam`` for even q)."""
    lam = lambda_of(q)
    if q % 2 == 0:
        return 1.0 / lam
    return (lam - 2 + math.sqrt(lam**2 - 4 * lam + 8)) / (2 * lam)
