import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rosenquilt.core import DomainError, Params, lambda_of
from rosenquilt.maps import (EMPTY, ZeroOrbit, alpha0, cylinder_of, delta_r, digit_of, endpoint_orbits, expand,
                             is_full_cylinder, omega0, t_alpha, verify_orbit_sync)

G = (math.sqrt(5) - 1) / 2


def test_t_alpha_examples():
    p = Params(3, 0.45)
    assert t_alpha(p, 0.0) == 0.0
    assert t_alpha(p, -0.55) == pytest.approx((2 * 0.45 - 1) / (1 - 0.45), abs=1e-12)
    assert t_alpha(p, 0.45) == pytest.approx((1 - 2 * 0.45) / 0.45, abs=1e-12)
    with pytest.raises(DomainError):
        t_alpha(p, 0.7)


def test_digit_examples():
    p = Params(3, 0.5)
    assert tuple(digit_of(p, 0.4)) == (1, 3)
    assert tuple(digit_of(p, -0.4)) == (-1, 3)
    with pytest.raises(ZeroOrbit):
        digit_of(p, 0.0)


@pytest.mark.parametrize("q, alpha, r", [(3, 0.5, 2), (5, 0.45, 4), (8, 0.48, 7)])
def test_digit_at_boundary(q, alpha, r):
    p = Params(q, alpha)
    assert digit_of(p, delta_r(p, r)).d == r + 1


def test_delta_r():
    p = Params(3, 0.5)
    assert delta_r(p, 2) == pytest.approx(0.4)
    assert delta_r(p, 1) == pytest.approx(2 / 3)
    assert delta_r(Params(3, 0.45), 2) > delta_r(p, 2)


def test_cylinders():
    p = Params(3, 0.5)
    c3 = cylinder_of(p, 1, 3)
    assert (c3.lo, c3.hi) == pytest.approx((1 / 3.5, 0.4))
    assert not c3.closed_lo and c3.closed_hi
    c2 = cylinder_of(p, 1, 2)
    assert (c2.lo, c2.hi) == pytest.approx((0.4, 0.5))
    assert cylinder_of(p, -1, 1) == EMPTY
    assert is_full_cylinder(p, 1, 3) and not is_full_cylinder(p, 1, 2)


def test_expand_examples():
    p = Params(3, 0.5)
    assert expand(p, 0.0, 5) == []
    for q in (4, 6, 8, 10):
        pp = q // 2
        p = Params(q, 0.5 * (alpha0(q) + 0.5))
        assert [tuple(d) for d in expand(p, p.lo, pp - 1)] == [(-1, 1)] * (pp - 1)
    for q in (5, 7, 9):
        h = (q - 3) // 2
        p = Params(q, 0.5 * (alpha0(q) + 0.5))
        want = [(-1, 1)] * h + [(-1, 2)] + [(-1, 1)] * h
        assert [tuple(d) for d in expand(p, -p.hi, 2 * h + 1)] == want


def test_endpoint_orbits():
    lo, ro = endpoint_orbits(Params(3, 0.5), 3)
    assert ro.points[1] == 0.0 and ro.terminated
    lo, ro = endpoint_orbits(Params(3, 0.45), 2)
    assert lo.points[2] == pytest.approx(ro.points[2], abs=1e-12)
    for q in (4, 6, 8):
        p = Params(q, 0.5 * (alpha0(q) + 0.5))
        lo, ro = endpoint_orbits(p, q // 2)
        assert lo.points[-1] == pytest.approx(ro.points[-1], abs=1e-10)


@pytest.mark.parametrize("q, alpha, k, kp", [
    (3, 0.45, 2, 2), (8, 0.48, 4, 4), (7, 0.499, 6, 6), (9, 0.4995, 8, 8),
    (7, 0.51, 3, 4), (5, 0.9 / lambda_of(5), 2, 3), (3, 0.7, 1, 2),
])
def test_orbit_sync(q, alpha, k, kp):
    rep = verify_orbit_sync(Params(q, alpha), 20)
    assert rep.matched and (rep.k, rep.k_prime) == (k, kp)
    assert rep.digits_differ_by_one
    assert rep.residual < 1e-8


def test_orbit_sync_past_omega0_is_staggered():
    for q in (3, 5, 7, 9):
        lam = lambda_of(q)
        p = Params(q, 0.5 * (omega0(q) + 1 / lam))
        rep = verify_orbit_sync(p, 20)
        assert rep.k_prime == rep.k + 1


def test_thresholds():
    assert alpha0(4) == pytest.approx((math.sqrt(3) - 1) / 2, abs=1e-12)
    assert alpha0(3) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert omega0(3) == pytest.approx(G, abs=1e-12)
    for q in (4, 6, 8, 10, 12):
        assert omega0(q) == 1 / lambda_of(q)


params = st.builds(lambda q, t: Params(q, alpha0(q) + t * (min(omega0(q), 1 / lambda_of(q)) - alpha0(q))),
                   st.integers(3, 12), st.floats(0.01, 0.99))


@given(params, st.floats(0, 1, exclude_max=True))
def test_range_invariant(p, u):
    x = p.lo + u * (p.hi - p.lo)
    y = t_alpha(p, x)
    assert p.lo - 1e-12 <= y < p.hi + 1e-12


@given(params, st.floats(0, 1, exclude_max=True))
def test_digit_matches_cylinder(p, u):
    x = p.lo + u * (p.hi - p.lo)
    if abs(x) < 1e-12:
        return
    dig = digit_of(p, x)
    assert x in cylinder_of(p, dig.eps, dig.d)
