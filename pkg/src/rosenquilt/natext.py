"""Planar natural extensions: the map on (x, y), the Rosen domains, and quilting.

Images of regions are carried as :class:`RegionImage`: an explicit canonical
region for the cylinders up to ``n_max`` plus :class:`TailFamily` records for
the infinitely many full cylinders accumulating at ``x = 0``.  A family maps
to horizontal strips ``X x {1/(m lam + c) : c in [c_lo, c_hi]}`` for every
``m >= m_start``; since those strips are periodic in ``s = 1/y`` with period
``lam``, two tails can be compared exactly by comparing their patterns of
``c mod lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .core import DEFAULT_TOL, SNAP_EPS, DomainError, Params, lambda_of
from .maps import ZERO_EPS, ZeroOrbit, _digit, alpha0, digit_of, omega0, t_alpha
from .region import Region, Slab, _mu, connected_components, region_equal, union_all

DEFAULT_N_MAX = 10_000
QUILT_TOL = 1e-7
#: Explicit materialisation guard when comparing tails.
MAX_MATERIALISED = 2_000_000
#: Image endpoints this close to 0 or to the ends of I_alpha are put exactly there.
ZERO_SNAP = 1e-10


class TailOverflowError(RuntimeError):
    """More measure was discarded than the caller tolerates."""


class QuiltConsistencyError(RuntimeError):
    """Two independent constructions of the same region disagree."""


# --- the planar map ------------------------------------------------------------------


class PlanarPoint(NamedTuple):
    x: float
    y: float


def t2(p: Params, pt) -> PlanarPoint:
    """``(x, y) -> (T_alpha(x), 1/(d lam + eps y))`` with ``(eps, d)`` the digit of ``x``."""
    x, y = pt
    if abs(x) < ZERO_EPS:
        raise ZeroOrbit("orbit terminated at x = 0")
    eps, d = digit_of(p, x)
    return PlanarPoint(t_alpha(p, x), 1.0 / (d * p.lam + eps * y))


def t2_array(p: Params, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised planar map; points with ``x == 0`` come back unchanged."""
    ax = np.abs(x)
    safe = np.where(ax < ZERO_EPS, 1.0, ax)
    d = np.floor(1.0 / (p.lam * safe) + 1.0 - p.alpha)
    nx = np.where(ax < ZERO_EPS, 0.0, 1.0 / safe - p.lam * d)
    ny = np.where(ax < ZERO_EPS, y, 1.0 / (d * p.lam + np.sign(x) * y))
    return nx, ny


# --- Rosen domains -------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """Data behind the alpha = 1/2 domain."""

    q: int
    parity: str  # "classical" | "even" | "odd"
    heights: tuple[float, ...]  # L_1, L_2, ... (index 0 holds L_1)
    marks: tuple[float, ...]  # phi_0, phi_1, ... (T_{1/2}-orbit of -lam/2)
    top: float  # fibre height over [0, lam/2)
    H: tuple[float, ...] = ()  # H_1, H_2, ... (even case)
    R: float | None = None


def _phi(q: int, n: int) -> list[float]:
    lam = lambda_of(q)
    out = [-lam / 2]
    for _ in range(n):
        x = out[-1]
        if abs(x) < 1e-12:
            out.append(0.0)
            continue
        nx = abs(1 / x) - lam * _digit(lam, 0.5, x)
        out.append(0.0 if abs(nx) < 1e-12 else nx)
    return out


def odd_root(q: int) -> float:
    """Positive root of ``R^2 + (2 - lam) R - 1 = 0``."""
    lam = lambda_of(q)
    b = 2 - lam
    return (-b + math.sqrt(b * b + 4)) / 2


def h_sequence(q: int, n: int) -> tuple[float, ...]:
    lam = lambda_of(q)
    out = [1 / lam]
    while len(out) < n:
        out.append(1 / (lam - out[-1]))
    return tuple(out)


def domain_spec(q: int) -> DomainSpec:
    lam = lambda_of(q)
    if q == 3:
        g = (math.sqrt(5) - 1) / 2
        return DomainSpec(q, "classical", (g * g,), (-0.5, 0.0), g, R=g)
    if q % 2 == 0:
        p = q // 2
        L = [1 / (lam + 1)]
        while len(L) < p - 1:
            L.append(1 / (lam - L[-1]))
        return DomainSpec(q, "even", tuple(L), tuple(_phi(q, p - 1)), 1.0, H=h_sequence(q, p))
    h = (q - 3) // 2
    R = odd_root(q)
    # L_1..L_{2h+2} are defined cyclically; the map is a contraction, so iterate to the fixed point.
    L = [0.5] * (2 * h + 3)
    for _ in range(10_000):
        old = list(L)
        L[1] = 1 / (2 * lam - L[2 * h])
        L[2] = 1 / (2 * lam - L[2 * h + 1])
        for j in range(3, 2 * h + 3):
            L[j] = 1 / (lam - L[j - 2])
        if max(abs(a - b) for a, b in zip(L[1:], old[1:])) < 1e-17:
            break
    return DomainSpec(q, "odd", tuple(L[1:]), tuple(_phi(q, 2 * h + 1)), R, R=R)


def omega_half(q: int) -> Region:
    """Domain of the natural extension of the Rosen map (alpha = 1/2)."""
    spec = domain_spec(q)
    lam = lambda_of(q)
    phi, L = spec.marks, spec.heights
    rects = []
    if spec.parity == "classical":
        rects = [(-0.5, 0.0, 0.0, L[0]), (0.0, 0.5, 0.0, spec.top)]
    elif spec.parity == "even":
        p = q // 2
        rects = [(phi[j - 1], phi[j], 0.0, L[j - 1]) for j in range(1, p)]
        rects.append((0.0, lam / 2, 0.0, 1.0))
    else:
        h = (q - 3) // 2
        J = {}
        for k in range(1, h + 1):
            J[2 * k] = (phi[h + k], phi[k])
        for k in range(0, h + 1):
            J[2 * k + 1] = (phi[k], phi[h + k + 1])
        rects = [(J[j][0], J[j][1], 0.0, L[j - 1]) for j in range(1, 2 * h + 2)]
        rects.append((0.0, lam / 2, 0.0, spec.R))
    return Region.from_rects(rects)


# --- images with tails -----------------------------------------------------------------


@dataclass(frozen=True)
class TailFamily:
    """Strips ``[x_lo, x_hi) x {1/(m lam + c): c_lo <= c <= c_hi}`` for all ``m >= m_start``."""

    x_lo: float
    x_hi: float
    c_lo: float
    c_hi: float
    m_start: int
    lam: float

    def strip(self, m: int) -> tuple[float, float, float, float]:
        return (self.x_lo, self.x_hi, 1 / (m * self.lam + self.c_hi), 1 / (m * self.lam + self.c_lo))

    def measure(self) -> float:
        return _series(lambda m: _mu(self.x_lo, self.x_hi, 1 / (m * self.lam + self.c_hi),
                                     1 / (m * self.lam + self.c_lo)), self.m_start)


def _series(f, m0: int, explicit: int = 20_000) -> float:
    """``sum_{m >= m0} f(m)`` for smooth ``f = O(1/m^2)``: explicit head plus a midpoint-rule integral."""
    m = np.arange(m0, m0 + explicit, dtype=float)
    head = float(np.sum(f(m)))
    start = m0 + explicit - 0.5
    val, _ = integrate.quad(lambda t: float(np.ravel(f(1.0 / t))[0]) / (t * t) if t > 0 else 0.0, 0.0, 1.0 / start,
                            epsabs=1e-14, epsrel=1e-8, limit=200)
    return head + val


@dataclass(frozen=True)
class RegionImage:
    """Explicit part plus tail families; ``dropped`` is measure that could not be carried forward."""

    explicit: Region
    tails: tuple[TailFamily, ...] = ()
    dropped: float = 0.0

    @classmethod
    def of(cls, region: Region) -> "RegionImage":
        return cls(region, (), 0.0)

    def measure(self) -> float:
        return self.explicit.measure() + sum(f.measure() for f in self.tails)

    def tail_measure(self) -> float:
        return sum(f.measure() for f in self.tails)

    @property
    def is_finite(self) -> bool:
        return not self.tails

    def x_extent(self) -> tuple[float, float]:
        lo, hi = [], []
        if not self.explicit.is_empty:
            a, b = self.explicit.x_extent()
            lo.append(a)
            hi.append(b)
        lo += [f.x_lo for f in self.tails]
        hi += [f.x_hi for f in self.tails]
        return (min(lo), max(hi)) if lo else (0.0, 0.0)


def _split_side(p: Params, rects: np.ndarray, n_max: int):
    """Cut one-signed rectangles ``(near, far, y0, y1)`` (``|x|`` in ``[near, far]``) at cylinder boundaries.

    Returns, for every explicit piece, the source row, ``|x|``-range and
    digit; the rows reaching 0 (full cylinders beyond ``n_max`` remain); and
    the ``|x|``-range left unprocessed when a row stops just short of 0.
    """
    lam, al = p.lam, p.alpha
    near, far = rects[:, 0], rects[:, 1]
    touches = near < ZERO_SNAP
    # cylinder r occupies |x| in (delta_r, delta_{r-1}]
    r_far = np.maximum(1, np.floor(1 / (lam * far) - al) + 1)
    with np.errstate(divide="ignore", over="ignore"):
        r_in = np.ceil(1 / (lam * np.maximum(near, 1e-300)) - al + 1) - 1
    r_near = np.where(touches, n_max, np.maximum(r_far, np.minimum(r_in, n_max)))
    short = ~touches & (r_in > n_max)
    rest_hi = np.where(short, 1 / (lam * (n_max + al)), near)
    counts = np.maximum(r_near - r_far + 1, 0).astype(np.int64)
    row = np.repeat(np.arange(len(rects)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    r = r_far[row] + offs
    lo = np.maximum(1 / (lam * (r + al)), near[row])
    with np.errstate(divide="ignore"):
        hi = np.where(r - 1 + al > 0, 1 / (lam * np.maximum(r - 1 + al, 1e-300)), np.inf)
    hi = np.minimum(hi, far[row])
    keep = hi > lo
    row, lo, hi = row[keep], lo[keep], hi[keep]
    d = np.floor(1 / (lam * 0.5 * (lo + hi)) + 1 - al)
    return row, lo, hi, d, touches, (near, rest_hi)


def step(p: Params, img: RegionImage | Region, n_max: int = DEFAULT_N_MAX) -> RegionImage:
    """One application of the planar map to a region.

    Each slab is cut by cylinders, each piece is mapped to a rectangle, and
    the pieces within ``|x| < delta_{n_max}`` of 0 become a tail family.
    Tail families already present in the input cannot be split finitely and
    are dropped; their measure is added to ``dropped``.  Points slightly
    outside I_alpha (the deleted regions) are mapped by the same formula.
    """
    if isinstance(img, Region):
        img = RegionImage.of(img)
    lam = p.lam
    dropped = img.dropped + img.tail_measure()
    arr = img.explicit.to_array()
    if arr.size and np.max(np.abs(arr[:, :2])) > 1 / (lam * max(p.alpha, 1e-12)):
        raise DomainError("region reaches points with digit 0")
    neg = arr[arr[:, 0] < 0]
    neg = np.column_stack([-np.minimum(neg[:, 1], 0.0), -neg[:, 0], neg[:, 2], neg[:, 3]])
    pos = arr[arr[:, 1] > 0]
    pos = np.column_stack([np.maximum(pos[:, 0], 0.0), pos[:, 1], pos[:, 2], pos[:, 3]])
    blocks, tails = [], []
    for side, sgn in ((pos, 1), (neg, -1)):
        side = side[side[:, 1] > side[:, 0]]
        if not side.size:
            continue
        row, lo, hi, d, touches, (r0, r1) = _split_side(p, side, n_max)
        y0, y1 = side[row, 2], side[row, 3]
        # T(x) = 1/|x| - d lam decreases in |x|
        nx0, nx1 = 1 / hi - lam * d, 1 / lo - lam * d
        if sgn > 0:
            ny0, ny1 = 1 / (d * lam + y1), 1 / (d * lam + y0)
        else:
            ny0, ny1 = 1 / (d * lam - y0), 1 / (d * lam - y1)
        blocks.append(np.column_stack([nx0, nx1, ny0, ny1]))
        gap = r1 > r0
        if gap.any():
            xr = (r0[gap], r1[gap]) if sgn > 0 else (-r1[gap], -r0[gap])
            dropped += float(np.sum(_mu(xr[0], xr[1], side[gap, 2], side[gap, 3])))
        for ya, yb in side[touches][:, 2:]:
            c0, c1 = (ya, yb) if sgn > 0 else (-yb, -ya)
            tails.append(TailFamily(p.lo, p.hi, float(c0), float(c1), n_max + 1, lam))
    out = np.concatenate(blocks) if blocks else np.empty((0, 4))
    # snap x-images onto the interval ends so full-cylinder images share one slab
    xs = out[:, :2]
    for v in (p.lo, p.hi, 0.0):
        xs[np.abs(xs - v) < ZERO_SNAP] = v
    return RegionImage(Region.from_rects(out), tuple(tails), dropped)


def iterate_region(p: Params, r: Region | RegionImage, steps: int, n_max: int = DEFAULT_N_MAX,
                   tail_tol: float | None = None) -> list[RegionImage]:
    """Images after 1..steps applications; raises :class:`TailOverflowError` past ``tail_tol``."""
    out = []
    cur = r if isinstance(r, RegionImage) else RegionImage.of(r)
    for _ in range(steps):
        cur = step(p, cur, n_max)
        if tail_tol is not None and cur.dropped > tail_tol:
            raise TailOverflowError(f"discarded tail measure {cur.dropped:.3e} exceeds {tail_tol:.1e}")
        out.append(cur)
    return out


# --- comparing images -----------------------------------------------------------------


def _pattern_rects(x0: float, x1: float, c0: float, c1: float, lam: float) -> list[tuple]:
    """The c-interval reduced mod lam, as rectangles in (x, c) space."""
    if c1 - c0 >= lam - SNAP_EPS:
        return [(x0, x1, 0.0, lam)]
    a = c0 % lam
    b = a + (c1 - c0)
    if b <= lam:
        return [(x0, x1, a, b)]
    return [(x0, x1, a, lam), (x0, x1, 0.0, b - lam)]


@dataclass(frozen=True)
class _Split:
    above: Region  # everything with y > y_star
    pattern: Region  # (x, c mod lam) pattern of everything with y <= y_star


def _split(img: RegionImage, s_star: float, lam: float) -> _Split:
    y_star = 1 / s_star
    strips = []
    pattern = []
    for f in img.tails:
        m = f.m_start
        while m * lam + f.c_lo < s_star:
            s0, s1 = m * lam + f.c_lo, min(m * lam + f.c_hi, s_star)
            if s1 > s0:
                strips.append((f.x_lo, f.x_hi, 1 / s1, 1 / s0))
            m += 1
            if len(strips) > MAX_MATERIALISED:
                raise TailOverflowError("too many strips to materialise for comparison")
        pattern += _pattern_rects(f.x_lo, f.x_hi, f.c_lo, f.c_hi, lam)
    above = img.explicit.clip(y_lo=y_star)
    if strips:
        above = above.union(Region.from_rects(strips, check_pole=False))
    low = img.explicit.clip(y_hi=y_star)
    for s in low.slabs:
        for y0, _ in s.ys:
            if y0 > SNAP_EPS:
                raise ValueError("explicit rectangle straddles the comparison level")
            pattern.append((s.x_lo, s.x_hi, 0.0, lam))
    return _Split(above, Region.from_rects(pattern, check_pole=False))


def _comparison_level(imgs, lam: float) -> float:
    s_star = 0.0
    for img in imgs:
        for f in img.tails:
            s_star = max(s_star, f.m_start * lam + f.c_hi)
        a = img.explicit.to_array()
        if a.size:
            pos = a[:, 2][a[:, 2] > SNAP_EPS]
            if pos.size:
                s_star = max(s_star, 1 / pos.min())
    return s_star + 1e-9 if s_star > 0 else 0.0


def image_difference(a: RegionImage, b: RegionImage, lam: float) -> float:
    """mu-measure of the symmetric difference of two images (tails compared by pattern).

    The part above the common comparison level is exact; below it the
    returned value is an upper bound derived from the pattern mismatch.
    """
    if a.is_finite and b.is_finite:
        return a.explicit.symmetric_difference(b.explicit).measure()
    s_star = _comparison_level((a, b), lam)
    sa, sb = _split(a, s_star, lam), _split(b, s_star, lam)
    exact = sa.above.symmetric_difference(sb.above).measure()
    mismatch = sa.pattern.symmetric_difference(sb.pattern)
    if mismatch.is_empty:
        return exact
    area = mismatch.area()
    xmax = max(abs(v) for s in mismatch.slabs for v in (s.x_lo, s.x_hi))
    density = 1 / (1 - xmax / s_star) ** 2
    return exact + area * density * (1 / s_star**2 + 1 / (lam * (s_star - lam)))


def close_tails(img: RegionImage, lam: float) -> RegionImage | None:
    """Turn tails into explicit rectangles when their patterns tile a full period.

    Returns ``None`` when some x-slab's pattern has gaps (the strips do not
    stack into a rectangle reaching ``y = 0``).
    """
    if img.is_finite:
        return img
    s_star = _comparison_level((img,), lam)
    sp = _split(img, s_star, lam)
    full = []
    for s in sp.pattern.slabs:
        if len(s.ys) != 1 or s.ys[0][0] > SNAP_EPS or s.ys[0][1] < lam - 1e-9:
            return None
        full.append((s.x_lo, s.x_hi, 0.0, 1 / s_star))
    region = sp.above.union(Region.from_rects(full))
    return RegionImage(region, (), img.dropped)


# --- changed digits, basic added / deleted regions ----------------------------------------


class ChangedDigits(NamedTuple):
    region: Region
    tail_measure: float
    n_max: int


def _changed_pieces(p: Params, r: np.ndarray):
    half = Params(p.q, 0.5)
    da = 1 / (p.lam * (r + p.alpha))
    dh = 1 / (p.lam * (r + 0.5))
    lo, hi = np.minimum(da, dh), np.maximum(da, dh)
    cut_lo = max(p.lo, half.lo)
    cut_hi = min(p.hi, half.hi)
    pos = (np.maximum(lo, 0.0), np.minimum(hi, cut_hi))
    neg = (np.maximum(-hi, cut_lo), np.minimum(-lo, 0.0))
    return pos, neg


def _near_zero_heights(omega: Region) -> tuple[float, float]:
    def top(x):
        ys = omega.fiber(x)
        if len(ys) != 1 or ys[0][0] > SNAP_EPS:
            raise DomainError("domain fibre next to 0 is not a single interval from 0")
        return ys[0][1]
    return top(1e-9), top(-1e-9)


def _above(omega: Region, lo: np.ndarray, hi: np.ndarray) -> Region:
    """``omega`` restricted to the union of the x-intervals ``[lo, hi)``."""
    blocks = []
    for s in omega.slabs:
        a, b = np.maximum(lo, s.x_lo), np.minimum(hi, s.x_hi)
        k = b > a
        for y0, y1 in s.ys:
            blocks.append(np.column_stack([a[k], b[k], np.full(k.sum(), y0), np.full(k.sum(), y1)]))
    # the pieces get as thin as 1e-13 far out; keep all of them
    return Region.from_rects(np.concatenate(blocks) if blocks else np.empty((0, 4)), eps=0.0)


def changed_digit_region(p: Params, n_max: int = DEFAULT_N_MAX, omega: Region | None = None) -> ChangedDigits:
    """Part of the alpha = 1/2 domain where the alpha-digit differs from the 1/2-digit.

    Pieces in cylinders up to ``n_max`` are explicit; the rest is reported as
    ``tail_measure``.
    """
    if omega is None:
        omega = omega_half(p.q)
    if p.alpha == 0.5:
        return ChangedDigits(Region.empty(), 0.0, n_max)
    r = np.arange(1, n_max + 1, dtype=float)
    (pl, ph), (nl, nh) = _changed_pieces(p, r)
    region = _above(omega, np.concatenate([pl, nl]), np.concatenate([ph, nh]))
    yp, yn = _near_zero_heights(omega)

    def tail_term(m):
        (a, b), (c, d) = _changed_pieces(p, np.atleast_1d(m))
        return _mu(a, b, 0.0, yp) + _mu(c, d, 0.0, yn)

    return ChangedDigits(region, _series(tail_term, n_max + 1), n_max)


def _changed_tail_families(p_map: Params, p: Params, n_max: int, omega: Region) -> list[TailFamily]:
    """Images under ``p_map`` of the changed-digit pieces beyond ``n_max``."""
    yp, yn = _near_zero_heights(omega)
    r = np.array([float(n_max + 1)])
    (pl, ph), (nl, nh) = _changed_pieces(p, r)
    fams = []
    lam = p_map.lam
    for a, b, pos, height in ((pl[0], ph[0], True, yp), (nl[0], nh[0], False, yn)):
        mid = 0.5 * (a + b)
        d = _digit(lam, p_map.alpha, mid)
        if pos:
            x0, x1 = 1 / b - lam * d, 1 / a - lam * d
            c0, c1 = 0.0, height
        else:
            x0, x1 = -1 / a - lam * d, -1 / b - lam * d
            c0, c1 = -height, 0.0
        fams.append(TailFamily(float(x0), float(x1), c0, c1, d, lam))
    return fams


def _image_of_changed(p_map: Params, p: Params, cd: ChangedDigits, omega: Region) -> Region:
    img = step(p_map, cd.region, cd.n_max + 2)
    fams = _changed_tail_families(p_map, p, cd.n_max, omega)
    # the explicit pieces do not reach 0, so no tails arise from the step itself
    full = RegionImage(img.explicit, tuple(fams), 0.0)
    closed = close_tails(full, p_map.lam)
    if closed is None:
        raise QuiltConsistencyError("changed-digit images do not stack into a rectangle")
    # endpoints come out of 1/x - d lam with d ~ n_max; put them back on the exact landmarks
    arr = closed.explicit.to_array()
    xs = arr[:, :2]
    for v in (p.lo, p.hi, -p.lam / 2, p.lam / 2, 0.0):
        xs[np.abs(xs - v) < 1e-9] = v
    return Region.from_rects(arr)


def d0(p: Params) -> Region:
    """Basic deleted region: the part of the 1/2-domain outside ``[l_0, r_0)``."""
    omega = omega_half(p.q)
    if p.alpha == 0.5:
        return Region.empty()
    if p.alpha < 0.5:
        return omega.clip(x_lo=p.hi)
    return omega.clip(x_hi=p.lo)


def a0_closed_form(p: Params) -> Region | None:
    """``[l_0, -lam/2) x [0, L_1)`` for alpha < 1/2 (``g^2`` in place of ``L_1`` when q = 3)."""
    if p.alpha >= 0.5:
        return None
    spec = domain_spec(p.q)
    return Region.from_rects([(p.lo, -p.lam / 2, 0.0, spec.heights[0])])


def _changed_clipped(p: Params, n_max: int) -> bool:
    """True when the common interval of the two maps cuts into some changed-digit piece."""
    r = np.arange(1, n_max + 1, dtype=float)
    da = 1 / (p.lam * (r + p.alpha))
    dh = 1 / (p.lam * (r + 0.5))
    far = np.maximum(da, dh)
    return bool(np.any(-far < max(p.lo, -p.lam / 2) - SNAP_EPS) or np.any(far > min(p.hi, p.lam / 2) + SNAP_EPS))


def a0(p: Params, n_max: int = DEFAULT_N_MAX, tol: float = DEFAULT_TOL) -> Region:
    """Basic added region, computed as the image of the changed-digit region.

    The image under the 1/2-map is cross-checked against :func:`d0` (and the
    two measures against each other) whenever the changed-digit pieces are
    not cut by the ends of I_alpha; for alpha < 1/2 the result is also checked
    against the closed form ``[l_0, -lam/2) x [0, L_1)``.
    """
    if p.alpha == 0.5:
        return Region.empty()
    omega = omega_half(p.q)
    cd = changed_digit_region(p, n_max, omega)
    added = _image_of_changed(p, p, cd, omega)
    if not _changed_clipped(p, n_max):
        deleted = _image_of_changed(Params(p.q, 0.5), p, cd, omega)
        if not region_equal(deleted, d0(p), tol):
            raise QuiltConsistencyError("image of changed digits under the 1/2-map is not D_0")
        if abs(added.measure() - deleted.measure()) > tol:
            raise QuiltConsistencyError("mu(A_0) != mu(D_0)")
    closed = a0_closed_form(p)
    if closed is not None:
        if not region_equal(added, closed, tol):
            raise QuiltConsistencyError("A_0 differs from [l_0, -lam/2) x [0, L_1)")
        return closed
    return added


# --- quilting ---------------------------------------------------------------------------


@dataclass
class QuiltReport:
    params: Params
    a_regions: list[RegionImage]
    d_regions: list[RegionImage]
    k_match: int
    k_prime_match: int
    matched: bool
    residual_measure: float
    omega_alpha: Region
    connected: bool
    components: int
    measure_delta: float
    a0_measure: float
    method: str = "quilt"  # "quilt" | "staircase" | "diagnostic"
    gap: Region = field(default_factory=Region.empty)
    tail_dropped: float = 0.0
    domain_defect: float | None = None

    @property
    def staggered(self) -> bool:
        return self.matched and self.k_match != self.k_prime_match

    @property
    def gap_strip(self) -> tuple[float, float, float, float] | None:
        """The heaviest rectangle of ``gap`` (the obstruction strip in diagnostic mode)."""
        rects = self.gap.to_array()
        if len(rects) == 0:
            return None
        return tuple(float(v) for v in max(rects, key=lambda r: _mu(*r)))

    def to_dict(self, full: bool = False) -> dict:
        def summary(img: RegionImage, i: int, limit: int):
            d = {"step": i, "measure": img.measure(), "rects": len(img.explicit.to_array()),
                 "tails": len(img.tails)}
            if full or i < limit:
                d["region"] = img.explicit.to_dict()
            return d
        return {
            "q": self.params.q,
            "alpha": self.params.alpha,
            "lambda": self.params.lam,
            "method": self.method,
            "matched": self.matched,
            "staggered": self.staggered,
            "k": self.k_match,
            "k_prime": self.k_prime_match,
            "residual_measure": self.residual_measure,
            "connected": self.connected,
            "components": self.components,
            "measure_delta": self.measure_delta,
            "a0_measure": self.a0_measure,
            "omega_measure": self.omega_alpha.measure(),
            "tail_dropped": self.tail_dropped,
            "domain_defect": self.domain_defect,
            "omega_alpha": self.omega_alpha.to_dict(),
            "gap": self.gap.to_dict(),
            "gap_measure": self.gap.measure(),
            "gap_strip": self.gap_strip,
            "a_regions": [summary(r, i, self.k_match) for i, r in enumerate(self.a_regions)],
            "d_regions": [summary(r, i, self.k_prime_match) for i, r in enumerate(self.d_regions)],
        }


def assemble_omega(omega: Region, added: list[Region], deleted: list[Region]) -> Region:
    """``(omega u added) minus (deleted not covered by added)``."""
    add = union_all(added)
    dele = union_all(deleted).subtract(add)
    return omega.union(add).subtract(dele)


def domain_defect(p: Params, omega: Region, n_max: int = 2_000) -> float:
    """mu-measure of ``T(omega)`` symmetric-difference ``omega`` (0 for a natural-extension domain)."""
    return image_difference(RegionImage.of(omega), step(p, omega, n_max), p.lam)


def forward_hull(p: Params, region: Region, n_max: int = 2_000, max_iter: int = 60,
                 tol: float = 1e-14) -> Region:
    """Smallest union ``region u T(region) u T^2(region) ...`` that is closed under the map.

    Used in diagnostic mode, where the finite list of images leaves deleted
    pieces that later images partly refill.
    """
    for _ in range(max_iter):
        new = region.union(step(p, region, n_max).explicit)
        if new.symmetric_difference(region).measure() < tol:
            return new
        region = new
    return region


def staircase_domain(p: Params, n_max: int = 500, max_iter: int = 500, tol: float = 1e-14,
                     start: float = 1.0) -> tuple[Region, int]:
    """Domain whose fibres are intervals ``[0, H(x))``, found as a fixed point.

    Starting from ``I_alpha x [0, start)``, the region is replaced by the
    area under the upper boundary of its image until nothing changes.  This
    is valid when the domain has no holes in its fibres, which is the case
    for alpha >= 1/2.  Returns the region and the number of iterations.
    """
    region = Region.from_rects([(p.lo, p.hi, 0.0, start)])
    for it in range(1, max_iter + 1):
        img = step(p, region, n_max).explicit
        new = Region.from_rects([(s.x_lo, s.x_hi, 0.0, s.ys[-1][1]) for s in img.slabs])
        moved = region.symmetric_difference(new).measure()
        region = new
        if moved < tol:
            return region, it
    raise QuiltConsistencyError(f"staircase iteration did not settle in {max_iter} steps")


def quilt(p: Params, k_max: int | None = None, n_max: int = DEFAULT_N_MAX, tol: float = QUILT_TOL,
          gap_tol: float = 1e-9) -> QuiltReport:
    """Iterate the basic added and deleted regions until their orbits agree.

    The first pair ``(k, k')`` (by increasing ``k + k'``) with
    ``T^k(A_0) = T^k'(D_0)`` up to ``tol`` is reported and the domain is
    assembled from the earlier images.

    When no pair agrees and alpha > 1/2 (where the pieces of the two orbits
    drift apart although the endpoint orbits synchronise) the domain is
    obtained by :func:`staircase_domain`; ``(k, k')`` then come from the
    endpoint synchronisation ``l_k = r_k'``.  Otherwise the report is a
    diagnostic: the domain is assembled from every computed image, closed
    under the map by :func:`forward_hull`, and ``gap`` holds the deleted
    part that nothing refills.
    """
    from .maps import verify_orbit_sync

    omega = omega_half(p.q)
    if k_max is None:
        k_max = p.q + 3
    if p.alpha == 0.5:
        return QuiltReport(p, [], [], 0, 0, True, 0.0, omega, True, connected_components(omega, gap_tol),
                           0.0, 0.0)
    A0 = a0(p, n_max)
    D0 = d0(p)
    A = [RegionImage.of(A0)]
    D = [RegionImage.of(D0)]

    def grow(seq, upto):
        # an image with tails cannot be stepped again without losing its tail measure
        while len(seq) <= upto and seq[-1].is_finite and len(seq) <= k_max:
            seq.append(step(p, seq[-1], n_max))

    hit = None
    best = (math.inf, 0, 0)
    # past omega_0 (odd q) leftover pieces of the two orbits never cancel, so no pair can agree
    search = not (p.q % 2 and p.alpha > omega0(p.q))
    for total in range(1, 2 * k_max + 1 if search else 1):
        for k in range(max(0, total - k_max), min(k_max, total) + 1):
            kp = total - k
            grow(A, k)
            grow(D, kp)
            if k >= len(A) or kp >= len(D):
                continue
            a, d = A[k], D[kp]
            ea, eb = a.x_extent(), d.x_extent()
            if abs(ea[0] - eb[0]) > 1e-6 or abs(ea[1] - eb[1]) > 1e-6:
                continue
            res = image_difference(a, d, p.lam)
            if res < best[0]:
                best = (res, k, kp)
            if res < tol:
                hit = (k, kp, res)
                break
        if hit:
            break

    a0m = A0.measure()
    if hit:
        k, kp, res = hit
        if any(not img.is_finite for img in A[:k] + D[:kp]):
            raise QuiltConsistencyError("an image before the match carries a tail")
        added = [img.explicit for img in A[:k]]
        deleted = [img.explicit for img in D[:kp]]
        omega_a = assemble_omega(omega, added, deleted)
        gap = union_all(deleted[1:]).subtract(union_all(added))
        comps = connected_components(omega_a, gap_tol)
        return QuiltReport(p, A, D, k, kp, True, res, omega_a, comps == 1, comps,
                           omega_a.measure() - omega.measure(), a0m, "quilt", gap,
                           max(A[k].dropped, D[kp].dropped))

    if p.alpha > 0.5:
        omega_a, _ = staircase_domain(p)
        defect = domain_defect(p, omega_a)
        sync = verify_orbit_sync(p, 4 * k_max)
        comps = connected_components(omega_a, gap_tol)
        ok = defect < tol and sync.matched
        grow(A, sync.k)
        grow(D, sync.k_prime)
        res = best[0]
        if sync.k < len(A) and sync.k_prime < len(D):
            res = image_difference(A[sync.k], D[sync.k_prime], p.lam)
        return QuiltReport(p, A, D, sync.k, sync.k_prime, ok, res, omega_a, comps == 1, comps,
                           omega_a.measure() - omega.measure(), a0m, "staircase", Region.empty(), 0.0, defect)

    finite_a = [img.explicit for img in A if img.is_finite]
    finite_d = [img.explicit for img in D if img.is_finite]
    omega_a = forward_hull(p, assemble_omega(omega, finite_a, finite_d))
    gap = union_all(finite_d[1:]).subtract(union_all(finite_a)).subtract(omega_a)
    comps = connected_components(omega_a, gap_tol)
    return QuiltReport(p, A, D, best[1], best[2], False, best[0], omega_a, comps == 1, comps,
                       omega_a.measure() - omega.measure(), a0m, "diagnostic", gap,
                       max(A[-1].dropped, D[-1].dropped))


# --- invariance checks --------------------------------------------------------------------


@dataclass
class InvarianceReport:
    n_samples: int
    max_measure_violation: float
    escape_measure: float
    dropped: float
    domain_defect: float | None = None

    def passed(self, tol: float = 1e-8) -> bool:
        ok = self.max_measure_violation < tol and self.escape_measure < tol
        return ok and (self.domain_defect is None or self.domain_defect < tol)


def check_invariance(p: Params, omega: Region, n_samples: int = 100, seed: int = 0,
                     n_max: int = 2_000, whole: bool = True) -> InvarianceReport:
    """Map random sub-rectangles of ``omega``; check mu is preserved and images stay inside.

    With ``whole=True`` the image of the entire domain is also compared to
    the domain itself (``domain_defect`` is the symmetric-difference measure).
    """
    rng = np.random.default_rng(seed)
    rects = omega.to_array()
    weights = np.array([_mu(*row) for row in rects])
    weights = weights / weights.sum()
    near = 1 / (p.lam * (n_max + p.alpha))
    worst = escape = dropped = 0.0
    for _ in range(n_samples):
        x0, x1, y0, y1 = rects[rng.choice(len(rects), p=weights)]
        xa, xb = np.sort(rng.uniform(x0, x1, 2))
        ya, yb = np.sort(rng.uniform(y0, y1, 2))
        if xa < 0 < xb:
            xb = 0.0
        if abs(xa) < near and abs(xb) < near:
            continue
        if 0 <= xa < near:
            xa = near
        if -near < xb <= 0:
            xb = -near
        if xb - xa <= SNAP_EPS or yb - ya <= SNAP_EPS:
            continue
        r = Region.from_rects([(xa, xb, ya, yb)])
        img = step(p, r, n_max)
        worst = max(worst, abs(img.measure() - r.measure()))
        escape += img.explicit.subtract(omega).measure()
        dropped += img.dropped
    defect = domain_defect(p, omega, n_max) if whole else None
    return InvarianceReport(n_samples, worst, escape, dropped, defect)


def alpha_grid(q: int, n: int, lo_margin: float = 0.01, hi: float | None = None) -> np.ndarray:
    """``n`` evenly spaced alpha values inside ``(alpha_0 + margin, hi)``."""
    a = alpha0(q) + lo_margin
    b = omega0(q) if hi is None else hi
    return np.linspace(a, b, n + 2)[1:-1]
