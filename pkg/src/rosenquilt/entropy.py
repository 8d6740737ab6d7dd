"""Normalising constants, closed-form entropy and a Birkhoff-average estimator."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import Params
from .natext import QuiltReport, odd_root, omega_half


@dataclass(frozen=True)
class EntropyResult:
    value: float
    method: str  # "closed-form" | "abramov" | "birkhoff"
    normalizer: float
    plateau: bool
    q: int | None = None
    alpha: float | None = None
    stderr: float | None = None
    seed: int | None = None
    restarts: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _b(q: int, n: int) -> float:
    return math.sin(n * math.pi / q) / math.sin(math.pi / q)


def norm_const(q: int) -> float:
    """``C`` with ``1/C`` the mu-measure of the alpha = 1/2 domain.

    Even q: ``1/ln((1 + cos(pi/q)) / sin(pi/q))``.  Odd ``q = 2h + 3``:
    ``1/ln((1 + R) B_{h+1})`` with ``B_n = sin(n pi/q)/sin(pi/q)``; for q = 3
    this is ``1/ln(1 + g)``.
    """
    if q % 2 == 0:
        return 1.0 / math.log((1 + math.cos(math.pi / q)) / math.sin(math.pi / q))
    h = (q - 3) // 2
    return 1.0 / math.log((1 + odd_root(q)) * _b(q, h + 1))


def norm_const_published(q: int) -> float:
    """The odd-q constant ``1/ln(1 + R)`` as usually quoted (exact only for q = 3)."""
    if q % 2 == 0:
        return norm_const(q)
    return 1.0 / math.log(1 + odd_root(q))


def entropy_closed_form(q: int) -> EntropyResult:
    c = norm_const(q)
    return EntropyResult(c * (q - 2) * math.pi**2 / (2 * q), "closed-form", c, True, q=q)


def entropy_for_alpha(p: Params, quilt: QuiltReport) -> EntropyResult:
    """Plateau value for synchronised quilting; Abramov-scaled value for staggered quilting.

    In the staggered case the domain carries an extra copy of added mass.
    Inducing past it gives a system isomorphic to the alpha = 1/2 one, so the
    entropy is scaled by ``1 - m/mu(Omega_alpha)`` where ``m`` is the mass of
    that copy, ``mu(Omega_alpha) - mu(Omega_1/2)``.
    """
    if not quilt.matched:
        raise ValueError("entropy needs a matched quilt")
    base = entropy_closed_form(p.q)
    if not quilt.staggered:
        return EntropyResult(base.value, "closed-form", base.normalizer, True, q=p.q, alpha=p.alpha)
    total = quilt.omega_alpha.measure()
    factor = 1 - quilt.measure_delta / total
    return EntropyResult(base.value * factor, "abramov", 1 / total, False, q=p.q, alpha=p.alpha)


def entropy_birkhoff(p: Params, n: int = 10_000_000, burn_in: int = 100, seed: int = 0,
                     chains: int = 2000) -> EntropyResult:
    """Birkhoff average of ``-2 ln|x|`` along ``T_alpha``-orbits.

    ``n`` orbit points are split over ``chains`` independent chains started
    uniformly in I_alpha (numpy PCG64 seeded with ``seed``); the standard
    error is the spread of the per-chain means.  Chains that land on 0 are
    restarted from a fresh random point.
    """
    if n < chains:
        chains = max(1, n)
    steps = n // chains
    rng = np.random.default_rng(seed)
    lam, al = p.lam, p.alpha
    x = rng.uniform(p.lo, p.hi, chains)
    restarts = 0
    acc = np.zeros(chains)
    for i in range(burn_in + steps):
        bad = np.abs(x) < 1e-15
        if bad.any():
            restarts += int(bad.sum())
            x[bad] = rng.uniform(p.lo, p.hi, int(bad.sum()))
        ax = np.abs(x)
        if i >= burn_in:
            acc -= 2 * np.log(ax)
        x = 1 / ax - lam * np.floor(1 / (lam * ax) + 1 - al)
    means = acc / steps
    value = float(means.mean())
    stderr = float(means.std(ddof=1) / math.sqrt(chains)) if chains > 1 else math.nan
    c = norm_const(p.q)
    return EntropyResult(value, "birkhoff", c, False, q=p.q, alpha=p.alpha, stderr=stderr, seed=seed,
                         restarts=restarts)


def domain_measure(q: int) -> float:
    return omega_half(q).measure()


__all__ = ["EntropyResult", "norm_const", "norm_const_published", "entropy_closed_form",
           "entropy_for_alpha", "entropy_birkhoff", "domain_measure"]
