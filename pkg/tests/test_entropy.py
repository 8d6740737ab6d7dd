import math

import pytest

from rosenquilt.core import Params, lambda_of
from rosenquilt.entropy import (domain_measure, entropy_birkhoff, entropy_closed_form, entropy_for_alpha, norm_const,
                                norm_const_published)
from rosenquilt.maps import alpha0, omega0
from rosenquilt.natext import alpha_grid, omega_half, quilt

G = (math.sqrt(5) - 1) / 2


def test_norm_const_examples():
    assert norm_const(3) == pytest.approx(1 / math.log(1 + G), abs=1e-12)
    assert norm_const(3) == pytest.approx(2.0780869, abs=1e-7)
    assert norm_const(4) == pytest.approx(1 / math.log(1 + math.sqrt(2)), abs=1e-12)
    assert norm_const_published(3) == norm_const(3)


@pytest.mark.parametrize("q", range(3, 13))
def test_norm_const_is_inverse_domain_measure(q):
    assert 1 / norm_const(q) == pytest.approx(omega_half(q).measure(), abs=1e-8)
    assert domain_measure(q) == pytest.approx(omega_half(q).measure())


def test_closed_form():
    assert entropy_closed_form(3).value == pytest.approx(math.pi**2 / (6 * math.log(1 + G)), abs=1e-12)
    assert entropy_closed_form(3).value == pytest.approx(3.4183, abs=1e-4)
    assert entropy_closed_form(4).value == pytest.approx((math.pi**2 / 4) / math.log(1 + math.sqrt(2)), abs=1e-12)


def test_plateau_values():
    for q, a in ((8, 0.48), (3, 0.45)):
        p = Params(q, a)
        e = entropy_for_alpha(p, quilt(p))
        assert e.plateau and e.value == pytest.approx(entropy_closed_form(q).value, abs=1e-12)


def test_plateau_grid_constant():
    for q in (4, 5, 6):
        base = entropy_closed_form(q).value
        for a in alpha_grid(q, 5, 0.01, omega0(q) if q % 2 else 0.5):
            p = Params(q, float(a))
            assert entropy_for_alpha(p, quilt(p)).value == pytest.approx(base, abs=1e-12)


def test_drop_past_omega0():
    for q, a in ((3, 0.7), (5, 0.5 * (omega0(5) + 1 / lambda_of(5)))):
        p = Params(q, a)
        e = entropy_for_alpha(p, quilt(p))
        assert e.method == "abramov" and not e.plateau
        assert e.value < entropy_closed_form(q).value


def test_nakada_value():
    # for q = 3 past g the domain has mass ln(1 + alpha), so h = pi^2/(6 ln(1 + alpha))
    a = 0.75
    e = entropy_for_alpha(Params(3, a), quilt(Params(3, a)))
    assert e.value == pytest.approx(math.pi**2 / (6 * math.log(1 + a)), rel=1e-8)


def test_unmatched_quilt_rejected():
    p = Params(8, alpha0(8) - 0.001)
    with pytest.raises(ValueError):
        entropy_for_alpha(p, quilt(p))


def test_birkhoff_small():
    e = entropy_birkhoff(Params(3, 0.5), 200_000, 100, seed=3)
    assert e.method == "birkhoff" and e.stderr > 0
    assert e.value == pytest.approx(entropy_closed_form(3).value, rel=0.02)
    again = entropy_birkhoff(Params(3, 0.5), 200_000, 100, seed=3)
    assert again.value == e.value
