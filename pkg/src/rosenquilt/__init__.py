"""Alpha-Rosen continued fractions: maps, planar natural extensions, quilting and entropy."""

from .core import DomainError, Mobius, Params, b_seq, lambda_of, mobius_apply, u_power
from .entropy import entropy_birkhoff, entropy_closed_form, entropy_for_alpha, norm_const
from .maps import alpha0, digit_of, endpoint_orbits, expand, omega0, orbit, t_alpha, verify_orbit_sync
from .natext import a0, changed_digit_region, d0, iterate_region, omega_half, quilt, t2
from .region import Rect, Region, connected_components, rect_measure, region_equal
from .simulate import containment, simulate

__all__ = [
    "DomainError", "Mobius", "Params", "b_seq", "lambda_of", "mobius_apply", "u_power",
    "entropy_birkhoff", "entropy_closed_form", "entropy_for_alpha", "norm_const",
    "alpha0", "digit_of", "endpoint_orbits", "expand", "omega0", "orbit", "t_alpha", "verify_orbit_sync",
    "a0", "changed_digit_region", "d0", "iterate_region", "omega_half", "quilt", "t2",
    "Rect", "Region", "connected_components", "rect_measure", "region_equal",
    "containment", "simulate",
]
