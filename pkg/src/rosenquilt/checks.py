"""The invariant suite run by ``rosenquilt verify``.

Every check returns a :class:`Check`; the suite passes when all of them do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .core import Params, b_seq, lambda_of, mobius_apply, u_power
from .entropy import entropy_closed_form, entropy_for_alpha, norm_const
from .maps import alpha0, cylinder_of, digit_of, endpoint_orbits, is_full_cylinder, omega0, t_alpha
from .natext import check_invariance, domain_spec, omega_half, quilt
from .region import Region, rect_measure, region_equal
from .simulate import read_csv, simulate, to_csv


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _plateau_params(qs=(3, 4, 5, 6, 7, 8)) -> list[Params]:
    out = []
    for q in qs:
        lo, hi = alpha0(q), min(omega0(q), 1 / lambda_of(q))
        out.append(Params(q, lo + 0.6 * (hi - lo)))
    return out


# --- core -------------------------------------------------------------------------------


def check_u_power_period(rng, samples=100, tol=1e-9) -> Check:
    worst = 0.0
    for q in range(3, 21):
        m = u_power(q, q)
        for x in rng.uniform(-5, 5, samples):
            worst = max(worst, abs(mobius_apply(m, x) - x))
    return Check("U^q acts as the identity", worst < tol, f"max error {worst:.3g}")


def check_b_recurrence(tol=1e-12) -> Check:
    worst = 0.0
    for q in range(3, 21):
        lam = lambda_of(q)
        b = b_seq(q, 3 * q)
        res = b[2:] - (lam * b[1:-1] - b[:-2])
        worst = max(worst, float(np.max(np.abs(res))), abs(b[0]), abs(b[1] - 1))
    return Check("B_n = lam B_{n-1} - B_{n-2}", worst < tol, f"max residual {worst:.3g}")


def check_b_relations(tol=1e-10) -> Check:
    worst = 0.0
    for q in range(3, 21):
        lam = lambda_of(q)
        b = b_seq(q, q + 2)
        if q % 2 == 0:
            p = q // 2
            terms = [b[p - 1] - lam / 2 * b[p], b[p - 1] - b[p + 1]]
            if p >= 2:
                terms.append(b[p - 2] - (lam**2 / 2 - 1) * b[p])
        else:
            h = (q - 3) // 2
            terms = [b[h + 1] - b[h + 2], b[h] - (lam - 1) * b[h + 1]]
            if h >= 1:
                terms.append(b[h - 1] - (lam**2 - lam - 1) * b[h + 1])
        worst = max(worst, max(abs(t) for t in terms))
    return Check("B-sequence relations for even and odd q", worst < tol, f"max residual {worst:.3g}")


# --- one-dimensional map ----------------------------------------------------------------


def check_range(rng, samples=10_000) -> Check:
    bad = 0
    for p in _plateau_params():
        for x in rng.uniform(p.lo, p.hi, samples):
            y = t_alpha(p, x)
            bad += not (p.lo <= y < p.hi)
    return Check("T_alpha maps I_alpha into itself", bad == 0, f"{bad} escapes")


def check_digit_cylinder(rng, samples=2_000) -> Check:
    bad = 0
    for p in _plateau_params():
        for x in rng.uniform(p.lo, p.hi, samples):
            if x == 0:
                continue
            dig = digit_of(p, x)
            bad += x not in cylinder_of(p, dig.eps, dig.d)
            for other in (dig.d - 1, dig.d + 1):
                if other >= 1:
                    bad += x in cylinder_of(p, dig.eps, other)
    return Check("digits agree with cylinders", bad == 0, f"{bad} disagreements")


def check_full_cylinders(tol=1e-9) -> Check:
    worst = 0.0
    for p in _plateau_params():
        for eps in (1, -1):
            for r in range(1, 30):
                if not is_full_cylinder(p, eps, r):
                    continue
                iv = cylinder_of(p, eps, r)
                # T is monotone on a cylinder, so the image runs between the endpoint images
                a = abs(1 / iv.lo) - p.lam * r
                b = abs(1 / iv.hi) - p.lam * r
                worst = max(worst, abs(min(a, b) - p.lo), abs(max(a, b) - p.hi))
    return Check("full cylinders map onto I_alpha", worst < tol, f"max endpoint error {worst:.3g}")


def check_key_identities(tol=1e-9) -> Check:
    worst = 0.0
    for q in (4, 6, 8, 10, 12):
        pp = q // 2
        for a in np.linspace(alpha0(q) + 0.005, 0.495, 4):
            p = Params(q, float(a))
            lo, ro = endpoint_orbits(p, pp)
            l, r = lo.points[pp - 1], ro.points[pp - 1]
            lam = p.lam
            worst = max(worst, abs(abs(1 / l) - abs(1 / r) - lam),
                        abs(l - (1 - 2 * a) * lam / (a * lam**2 - 2)),
                        abs(r - (2 * a - 1) * lam / ((1 - a) * lam**2 - 2)))
    for q in (5, 7, 9, 11):
        h = (q - 3) // 2
        a0 = alpha0(q)
        for a in np.linspace(a0 + 0.2 * (0.5 - a0), 0.5 - 0.1 * (0.5 - a0), 4):
            p = Params(q, float(a))
            lo, ro = endpoint_orbits(p, 2 * h + 1)
            l, r = lo.points[2 * h + 1], ro.points[2 * h + 1]
            worst = max(worst, abs(abs(1 / r) - abs(1 / l) + p.lam))
    return Check("endpoint-orbit identities before synchronisation", worst < tol, f"max error {worst:.3g}")


# --- regions ----------------------------------------------------------------------------


def _random_rects(rng, n):
    out = []
    while len(out) < n:
        x0, x1 = np.sort(rng.uniform(-1, 1, 2))
        y0, y1 = np.sort(rng.uniform(0, 1, 2))
        if x1 - x0 > 1e-3 and y1 - y0 > 1e-3 and min(1 + x0 * y1, 1 + x1 * y0, 1 + x0 * y0) > 0.1:
            out.append((x0, x1, y0, y1))
    return out


def check_region_algebra(rng, trials=100, tol=1e-10) -> Check:
    worst = 0.0
    idem = True
    for _ in range(trials):
        a = Region.from_rects(_random_rects(rng, 4))
        b = Region.from_rects(_random_rects(rng, 4))
        add = a.union(b).measure() - (a.measure() + b.measure() - a.intersect(b).measure())
        sub = a.subtract(b).union(a.intersect(b)).symmetric_difference(a).measure()
        worst = max(worst, abs(add), sub)
        again = Region.from_rects(a.to_array())
        idem &= np.array_equal(again.to_array(), a.to_array())
    ok = worst < tol and idem
    return Check("region algebra: additivity, inverse, canonical form", ok,
                 f"max error {worst:.3g}, idempotent {idem}")


def check_rect_measure(rng, n=100, tol=1e-8) -> Check:
    worst = 0.0
    for x0, x1, y0, y1 in _random_rects(rng, n):
        ref, _ = integrate.dblquad(lambda y, x: 1 / (1 + x * y) ** 2, x0, x1, y0, y1,
                                   epsabs=1e-13, epsrel=1e-12)
        worst = max(worst, abs(rect_measure((x0, x1, y0, y1)) - ref))
    return Check("rect_measure matches quadrature", worst < tol, f"max error {worst:.3g}")


# --- natural extension ------------------------------------------------------------------


def check_invariance_half(seed=0, samples=50, tol=1e-8) -> Check:
    worst = 0.0
    for q in (3, 4, 5, 8):
        rep = check_invariance(Params(q, 0.5), omega_half(q), samples, seed)
        worst = max(worst, rep.max_measure_violation, rep.escape_measure, rep.domain_defect or 0.0)
    return Check("the alpha = 1/2 domain is invariant and mu is preserved", worst < tol,
                 f"max violation {worst:.3g}")


def check_quilts(tol=1e-8) -> Check:
    notes = []
    ok = True
    for p in _plateau_params((3, 4, 5, 6, 8)):
        r = quilt(p)
        same = r.matched and abs(r.measure_delta) < tol and r.connected
        images = max(abs(img.measure() - r.a_regions[0].measure()) for img in r.a_regions[: r.k_match + 1]
                     if img.is_finite)
        same &= images < tol
        ok &= same
        notes.append(f"q={p.q} k={r.k_match} dm={r.measure_delta:.1e}")
    return Check("quilting preserves the domain measure on the plateau", ok, "; ".join(notes))


def check_classical(tol=1e-8) -> Check:
    g = (math.sqrt(5) - 1) / 2
    ok = True
    for a in (0.43, 0.45, 0.48):
        p = Params(3, a)
        r = quilt(p)
        lo, ro = endpoint_orbits(p, 1)
        l1, r1 = lo.points[1], ro.points[1]
        target = Region.from_rects([(a - 1, l1, 0, g * g), (l1, r1, 0, g * g), (l1, r1, 0.5, g), (r1, a, 0, g)])
        ok &= r.matched and r.k_match == r.k_prime_match == 2 and region_equal(r.omega_alpha, target, tol)
    return Check("q = 3 domains are the three-slab regions", ok)


def check_even_layers(tol=1e-9) -> Check:
    ok = True
    for q in (4, 6, 8, 10):
        pp = q // 2
        p = Params(q, alpha0(q) + 0.02)
        r = quilt(p)
        lo, _ = endpoint_orbits(p, pp)
        h = domain_spec(q).H
        target = Region.from_rects([(lo.points[pp - 1], 0.0, h[pp - 2], 1.0)])
        ok &= region_equal(r.a_regions[pp - 1].explicit, target, tol)
    return Check("even q: the added region before matching is [l_{p-1}, 0) x [H_{p-1}, 1)", ok)


def check_disconnection(tol=1e-9) -> Check:
    p = Params(8, alpha0(8))
    r = quilt(p)
    spec = domain_spec(8)
    strip = Region.from_rects([(0.0, p.hi, spec.heights[2], spec.H[2])])
    left = strip.intersect(r.omega_alpha).measure()
    ok = not r.connected and left < tol
    return Check("q = 8 at alpha_0: the strip [0, r_0) x [L_3, H_3) is never refilled", ok,
                 f"components {r.components}, strip mass inside {left:.3g}")


# --- entropy and simulation -------------------------------------------------------------


def check_norm_const(tol=1e-8) -> Check:
    worst = max(abs(1 / norm_const(q) - omega_half(q).measure()) for q in range(3, 13))
    return Check("1/C is the measure of the alpha = 1/2 domain", worst < tol, f"max error {worst:.3g}")


def check_plateau_and_drop() -> Check:
    ok = True
    notes = []
    for q in (3, 5, 8):
        base = entropy_closed_form(q).value
        hi = omega0(q) if q % 2 else 0.5
        for a in np.linspace(alpha0(q) + 0.01, hi, 7)[1:-1]:
            p = Params(q, float(a))
            ok &= abs(entropy_for_alpha(p, quilt(p)).value - base) < 1e-12
    for q in (3, 5):
        p = Params(q, 0.5 * (omega0(q) + 1 / lambda_of(q)))
        e = entropy_for_alpha(p, quilt(p))
        ok &= e.value < entropy_closed_form(q).value
        notes.append(f"q={q} drop to {e.value:.5f}")
    return Check("entropy is constant on the plateau and drops beyond omega_0", ok, "; ".join(notes))


def check_csv_roundtrip(seed=0) -> Check:
    cloud = simulate(Params(5, 0.45), 2_000, 50, seed)
    back = read_csv(to_csv(cloud))
    ok = np.array_equal(back, cloud.points)
    return Check("CSV clouds round-trip exactly", bool(ok))


def run_suite(seed: int = 0, samples: int = 100, quick: bool = False) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks: list[Callable[[], Check]] = [
        lambda: check_u_power_period(rng, samples),
        check_b_recurrence,
        check_b_relations,
        lambda: check_range(rng, 100 * samples),
        lambda: check_digit_cylinder(rng, 20 * samples),
        check_full_cylinders,
        check_key_identities,
        lambda: check_region_algebra(rng, samples),
        lambda: check_rect_measure(rng, samples),
        lambda: check_invariance_half(seed, max(10, samples // 2)),
        check_norm_const,
        lambda: check_csv_roundtrip(seed),
    ]
    if not quick:
        checks += [check_quilts, check_classical, check_even_layers, check_disconnection, check_plateau_and_drop]
    return [c() for c in checks]
