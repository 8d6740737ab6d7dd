import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from rosenquilt.core import DomainError
from rosenquilt.region import Rect, Region, connected_components, rect_measure, region_equal, union_all

G = (math.sqrt(5) - 1) / 2


def quad_mu(x0, x1, y0, y1):
    val, _ = integrate.dblquad(lambda y, x: 1 / (1 + x * y) ** 2, x0, x1, y0, y1, epsabs=1e-13, epsrel=1e-12)
    return val


def test_unit_square():
    assert rect_measure((0, 1, 0, 1)) == pytest.approx(math.log(2), abs=1e-12)
    assert rect_measure((0, 1, 0, 1)) == pytest.approx(quad_mu(0, 1, 0, 1), abs=1e-10)


def test_degenerate_rect():
    assert rect_measure((0.2, 0.2, 0, 1)) == 0.0


def test_classical_domain_measure():
    total = rect_measure((-0.5, 0, 0, G * G)) + rect_measure((0, 0.5, 0, G))
    assert total == pytest.approx(math.log(1 + G), abs=1e-12)
    assert total == pytest.approx(quad_mu(-0.5, 0, 0, G * G) + quad_mu(0, 0.5, 0, G), abs=1e-10)


def test_pole_rejected():
    with pytest.raises(DomainError):
        Region.from_rects([(-2, 0, 0, 1)])
    with pytest.raises(DomainError):
        Rect(-2, 0, 0, 1)


rect = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 0.9), st.floats(0, 0.9)).filter(
    lambda r: abs(r[1] - r[0]) > 1e-3 and abs(r[3] - r[2]) > 1e-3).map(
    lambda r: (min(r[0], r[1]), max(r[0], r[1]), min(r[2], r[3]), max(r[2], r[3])))
family = st.lists(rect, min_size=1, max_size=5)


@given(rect)
def test_rect_measure_matches_quadrature(r):
    x0, x1, y0, y1 = r
    if min(1 + x0 * y1, 1 + x1 * y0) <= 0.1:
        return
    assert rect_measure(r) == pytest.approx(quad_mu(*r), abs=1e-8)


@given(family, family)
def test_measure_additivity(fa, fb):
    a, b = Region.from_rects(fa), Region.from_rects(fb)
    lhs = a.union(b).measure()
    rhs = a.measure() + b.measure() - a.intersect(b).measure()
    assert lhs == pytest.approx(rhs, abs=1e-10)


@given(family)
def test_canonical_idempotent(fa):
    a = Region.from_rects(fa)
    assert np.array_equal(Region.from_rects(a.to_array()).to_array(), a.to_array())


@given(family, family)
def test_subtract_union_inverse(fa, fb):
    a = Region.from_rects(fa)
    b = a.intersect(Region.from_rects(fb))
    back = a.subtract(b).union(a.intersect(b))
    assert region_equal(back, a, 1e-10)


def test_set_algebra_examples():
    a = Region.from_rects([(0, 1, 0, 1)])
    assert a.subtract(a).is_empty
    b = Region.from_rects([(1, 2, 0, 0.5)])
    assert a.union(b).measure() == pytest.approx(a.measure() + b.measure(), abs=1e-14)
    assert region_equal(a, a, 1e-9)
    shifted = Region.from_rects([(2e-9, 1 + 2e-9, 0, 1)])
    assert not region_equal(a, shifted, 1e-9)
    assert union_all([]).is_empty


def test_connected_components():
    tol = 1e-9
    assert connected_components(Region.from_rects([(0, 1, 0, 1)]), tol) == 1
    two = Region.from_rects([(0, 1, 0, 1), (1 + 10 * tol, 2, 0, 1)])
    assert connected_components(two, tol) == 2
    touching = Region.from_rects([(0, 1, 0, 1), (1, 2, 0.5, 0.9)])
    assert connected_components(touching, tol) == 1
    stacked = Region.from_rects([(0, 1, 0, 0.3), (0, 1, 0.5, 0.9)])
    assert connected_components(stacked, tol) == 2


def test_json_roundtrip():
    a = Region.from_rects([(-0.5, 0, 0, G * G), (0, 0.5, 0, G), (0.1, 0.3, 0.7, 0.9)])
    text = a.to_json()
    back = Region.from_json(text)
    assert np.array_equal(back.to_array(), a.to_array())
    doc = json.loads(text)
    assert list(doc) == ["slabs"] and list(doc["slabs"][0]) == ["x", "ys"]


def test_fiber_and_contains():
    a = Region.from_rects([(0, 1, 0, 0.3), (0, 1, 0.5, 0.9)])
    assert a.fiber(0.5) == ((0.0, 0.3), (0.5, 0.9))
    assert list(a.contains(np.array([0.5, 0.5, 1.0]), np.array([0.1, 0.4, 0.1]))) == [True, False, False]
