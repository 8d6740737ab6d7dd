"""Finite unions of axis-aligned rectangles with exact mu-measure.

A :class:`Region` is stored in canonical slab form: the x-axis is cut at every
rectangle endpoint, each slab carries a sorted list of disjoint y-intervals,
and neighbouring slabs with identical y-sets are merged.  All intervals are
closed on the left and open on the right.  Sets are compared up to measure
zero, so boundary ownership is never tracked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import SNAP_EPS, DomainError

Interval1D = tuple[float, float]


@dataclass(frozen=True)
class Rect:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo <= self.x_hi and self.y_lo <= self.y_hi):
            raise DomainError(f"malformed rectangle {self}")
        if _min_one_plus_xy(self.x_lo, self.x_hi, self.y_lo, self.y_hi) <= 0:
            raise DomainError(f"1 + xy vanishes on {self}; mu-density has a pole")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_lo, self.x_hi, self.y_lo, self.y_hi)


def _min_one_plus_xy(x0, x1, y0, y1):
    return min(1 + x0 * y0, 1 + x0 * y1, 1 + x1 * y0, 1 + x1 * y1)


def _mu(x0, x1, y0, y1):
    """Closed-form integral of dx dy / (1 + xy)^2 over [x0,x1] x [y0,y1] (vectorised)."""
    return np.log1p(x0 * y0) + np.log1p(x1 * y1) - np.log1p(x0 * y1) - np.log1p(x1 * y0)


def rect_measure(r: Rect | Sequence[float]) -> float:
    """mu-measure of a rectangle, ``ln((1+x0 y0)(1+x1 y1) / ((1+x0 y1)(1+x1 y0)))``."""
    if not isinstance(r, Rect):
        r = Rect(*r)
    if r.x_lo == r.x_hi or r.y_lo == r.y_hi:
        return 0.0
    return float(_mu(r.x_lo, r.x_hi, r.y_lo, r.y_hi))


# --- one-dimensional interval sets -------------------------------------------------


def _normalize(ivs: Iterable[Interval1D], eps: float = SNAP_EPS) -> tuple[Interval1D, ...]:
    """Sort, merge overlapping or nearly touching intervals, drop slivers."""
    items = sorted((lo, hi) for lo, hi in ivs if hi - lo > eps)
    out: list[list[float]] = []
    for lo, hi in items:
        if out and lo <= out[-1][1] + eps:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out if hi - lo > eps)


def _combine(a: Sequence[Interval1D], b: Sequence[Interval1D], keep: Callable[[bool, bool], bool],
             eps: float = SNAP_EPS) -> tuple[Interval1D, ...]:
    if not a and not b:
        return ()
    pts = sorted({p for iv in a for p in iv} | {p for iv in b for p in iv})
    out = []
    ia = ib = 0
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (lo + hi)
        while ia < len(a) and a[ia][1] <= mid:
            ia += 1
        while ib < len(b) and b[ib][1] <= mid:
            ib += 1
        in_a = ia < len(a) and a[ia][0] <= mid
        in_b = ib < len(b) and b[ib][0] <= mid
        if keep(in_a, in_b):
            out.append((lo, hi))
    return _normalize(out, eps)


def _ys_close(a: Sequence[Interval1D], b: Sequence[Interval1D], eps: float = SNAP_EPS) -> bool:
    if len(a) != len(b):
        return False
    return all(abs(p[0] - q[0]) <= eps and abs(p[1] - q[1]) <= eps for p, q in zip(a, b))


_OPS = {
    "union": lambda x, y: x or y,
    "intersect": lambda x, y: x and y,
    "subtract": lambda x, y: x and not y,
    "xor": lambda x, y: x != y,
}


def _snap_points(values: Iterable[float], eps: float) -> np.ndarray:
    """Sorted representatives: values within ``eps`` of their predecessor collapse onto it."""
    v = np.unique(np.asarray(list(values), dtype=float))
    if v.size == 0:
        return v
    keep = np.ones(v.size, dtype=bool)
    keep[1:] = np.diff(v) > eps
    return v[keep]


def _snap_index(reps: np.ndarray, x: np.ndarray, eps: float) -> np.ndarray:
    """Index of the representative each value collapses to."""
    idx = np.searchsorted(reps, x + eps, side="right") - 1
    return np.clip(idx, 0, reps.size - 1)


# --- regions -------------------------------------------------------------------------


@dataclass(frozen=True)
class Slab:
    x_lo: float
    x_hi: float
    ys: tuple[Interval1D, ...]


@dataclass(frozen=True)
class Region:
    """Canonical finite union of rectangles; build with :meth:`from_rects`."""

    slabs: tuple[Slab, ...] = ()

    # construction ------------------------------------------------------------------

    @classmethod
    def empty(cls) -> "Region":
        return cls(())

    @classmethod
    def from_rects(cls, rects, eps: float = SNAP_EPS, check_pole: bool = True) -> "Region":
        """Canonical region covering the given ``(x_lo, x_hi, y_lo, y_hi)`` rectangles."""
        arr = np.asarray([r.as_tuple() if isinstance(r, Rect) else tuple(r) for r in rects]
                         if not isinstance(rects, np.ndarray) else rects, dtype=float)
        if arr.size == 0:
            return cls.empty()
        arr = arr.reshape(-1, 4)
        if np.any(arr[:, 0] > arr[:, 1]) or np.any(arr[:, 2] > arr[:, 3]):
            raise DomainError("rectangle with lo > hi")
        arr = arr[(arr[:, 1] - arr[:, 0] > eps) & (arr[:, 3] - arr[:, 2] > eps)]
        if check_pole and arr.size:
            x0, x1, y0, y1 = arr.T
            m = np.minimum.reduce([1 + x0 * y0, 1 + x0 * y1, 1 + x1 * y0, 1 + x1 * y1])
            if np.any(m <= 0):
                raise DomainError("rectangle touches the pole 1 + xy = 0")
        return cls._build(arr, eps)

    @classmethod
    def from_slabs(cls, slabs: Iterable[tuple[float, float, Iterable[Interval1D]]],
                   eps: float = SNAP_EPS) -> "Region":
        rects = [(x0, x1, y0, y1) for x0, x1, ys in slabs for y0, y1 in ys]
        return cls.from_rects(rects, eps)

    @classmethod
    def _build(cls, arr: np.ndarray, eps: float) -> "Region":
        if arr.size == 0:
            return cls.empty()
        reps = _snap_points(np.concatenate([arr[:, 0], arr[:, 1]]), eps)
        i0 = _snap_index(reps, arr[:, 0], eps)
        i1 = _snap_index(reps, arr[:, 1], eps)
        groups: dict[tuple[int, int], list[Interval1D]] = {}
        for a, b, y0, y1 in zip(i0.tolist(), i1.tolist(), arr[:, 2].tolist(), arr[:, 3].tolist()):
            if a < b:
                groups.setdefault((a, b), []).append((y0, y1))
        order = sorted(groups)
        norm = {g: _normalize(groups[g], eps) for g in order}
        slabs: list[Slab] = []
        active: list[tuple[int, int]] = []
        gi = 0
        cache_key, cache_ys = None, ()
        for k in range(reps.size - 1):
            while gi < len(order) and order[gi][0] <= k:
                active.append(order[gi])
                gi += 1
            active = [g for g in active if g[1] > k]
            if not active:
                continue
            key = tuple(active)
            if key != cache_key:
                if len(active) == 1:
                    cache_ys = norm[active[0]]
                else:
                    cache_ys = _normalize([iv for g in active for iv in norm[g]], eps)
                cache_key = key
            if cache_ys:
                slabs.append(Slab(float(reps[k]), float(reps[k + 1]), cache_ys))
        return cls(tuple(_merge_slabs(slabs, eps)))

    # algebra ------------------------------------------------------------------------

    def _overlay(self, other: "Region", op: str, eps: float = SNAP_EPS) -> "Region":
        keep = _OPS[op]
        edges = [s.x_lo for s in self.slabs] + [s.x_hi for s in self.slabs]
        edges += [s.x_lo for s in other.slabs] + [s.x_hi for s in other.slabs]
        if not edges:
            return Region.empty()
        reps = _snap_points(edges, eps)
        out: list[Slab] = []
        ia = ib = 0
        A, B = self.slabs, other.slabs
        for lo, hi in zip(reps[:-1].tolist(), reps[1:].tolist()):
            mid = 0.5 * (lo + hi)
            while ia < len(A) and A[ia].x_hi <= mid:
                ia += 1
            while ib < len(B) and B[ib].x_hi <= mid:
                ib += 1
            ya = A[ia].ys if ia < len(A) and A[ia].x_lo <= mid else ()
            yb = B[ib].ys if ib < len(B) and B[ib].x_lo <= mid else ()
            if not ya and not yb:
                continue
            if op == "union" and not yb:
                ys = ya
            elif op == "union" and not ya:
                ys = yb
            elif op in ("subtract", "intersect") and not ya:
                continue
            elif op == "subtract" and not yb:
                ys = ya
            else:
                ys = _combine(ya, yb, keep, eps)
            if ys:
                out.append(Slab(lo, hi, ys))
        return Region(tuple(_merge_slabs(out, eps)))

    def union(self, other: "Region") -> "Region":
        return self._overlay(other, "union")

    def intersect(self, other: "Region") -> "Region":
        return self._overlay(other, "intersect")

    def subtract(self, other: "Region") -> "Region":
        return self._overlay(other, "subtract")

    def symmetric_difference(self, other: "Region") -> "Region":
        return self._overlay(other, "xor")

    __or__ = union
    __and__ = intersect
    __sub__ = subtract
    __xor__ = symmetric_difference

    def canonicalize(self) -> "Region":
        return Region._build(self.to_array(), SNAP_EPS)

    # queries ------------------------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.slabs

    def to_array(self) -> np.ndarray:
        """All rectangles as an ``(n, 4)`` array of ``x_lo, x_hi, y_lo, y_hi``."""
        rows = [(s.x_lo, s.x_hi, y0, y1) for s in self.slabs for y0, y1 in s.ys]
        return np.asarray(rows, dtype=float).reshape(-1, 4)

    def rects(self) -> list[Rect]:
        return [Rect(*row) for row in self.to_array().tolist()]

    def measure(self) -> float:
        """Total mu-measure."""
        a = self.to_array()
        if a.size == 0:
            return 0.0
        return float(np.sum(_mu(a[:, 0], a[:, 1], a[:, 2], a[:, 3])))

    def area(self) -> float:
        """Plain Lebesgue area."""
        a = self.to_array()
        if a.size == 0:
            return 0.0
        return float(np.sum((a[:, 1] - a[:, 0]) * (a[:, 3] - a[:, 2])))

    def bbox(self) -> tuple[float, float, float, float]:
        a = self.to_array()
        if a.size == 0:
            raise ValueError("empty region has no bounding box")
        return float(a[:, 0].min()), float(a[:, 1].max()), float(a[:, 2].min()), float(a[:, 3].max())

    def x_extent(self) -> tuple[float, float]:
        return self.slabs[0].x_lo, self.slabs[-1].x_hi

    def fiber(self, x: float) -> tuple[Interval1D, ...]:
        """y-intervals above ``x`` (empty tuple outside the region)."""
        lo = [s.x_lo for s in self.slabs]
        i = int(np.searchsorted(lo, x, side="right")) - 1
        if i >= 0 and x < self.slabs[i].x_hi:
            return self.slabs[i].ys
        return ()

    def contains(self, x, y) -> np.ndarray:
        """Vectorised point membership (half-open convention)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.zeros(x.shape, dtype=bool)
        if self.is_empty:
            return out
        lo = np.array([s.x_lo for s in self.slabs])
        hi = np.array([s.x_hi for s in self.slabs])
        idx = np.searchsorted(lo, x, side="right") - 1
        ok = (idx >= 0) & (x < hi[np.clip(idx, 0, None)])
        for i in np.unique(idx[ok]):
            sel = ok & (idx == i)
            ys = np.asarray(self.slabs[i].ys)
            j = np.searchsorted(ys[:, 0], y[sel], side="right") - 1
            out[sel] = (j >= 0) & (y[sel] < ys[np.clip(j, 0, None), 1])
        return out

    def clip(self, x_lo=-math.inf, x_hi=math.inf, y_lo=-math.inf, y_hi=math.inf) -> "Region":
        box = Region((Slab(max(x_lo, -1e300), min(x_hi, 1e300),
                           ((max(y_lo, -1e300), min(y_hi, 1e300)),)),))
        return self.intersect(box)

    # serialisation ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"slabs": [{"x": [s.x_lo, s.x_hi], "ys": [list(iv) for iv in s.ys]} for s in self.slabs]}

    def to_json(self) -> str:
        return dumps17(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Region":
        return cls.from_slabs((s["x"][0], s["x"][1], [tuple(iv) for iv in s["ys"]]) for s in d["slabs"])

    @classmethod
    def from_json(cls, text: str) -> "Region":
        return cls.from_dict(json.loads(text))


def _merge_slabs(slabs: list[Slab], eps: float) -> list[Slab]:
    out: list[Slab] = []
    for s in slabs:
        if out and abs(out[-1].x_hi - s.x_lo) <= eps and _ys_close(out[-1].ys, s.ys, eps):
            out[-1] = Slab(out[-1].x_lo, s.x_hi, out[-1].ys)
        else:
            out.append(s)
    return out


def union(a: Region, b: Region) -> Region:
    return a.union(b)


def intersect(a: Region, b: Region) -> Region:
    return a.intersect(b)


def subtract(a: Region, b: Region) -> Region:
    return a.subtract(b)


def union_all(regions: Iterable[Region]) -> Region:
    """Union of many regions in one canonicalisation pass."""
    arrays = [r.to_array() for r in regions]
    arrays = [a for a in arrays if a.size]
    if not arrays:
        return Region.empty()
    return Region._build(np.concatenate(arrays), SNAP_EPS)


def symmetric_difference_measure(a: Region, b: Region) -> float:
    return a.symmetric_difference(b).measure()


def region_equal(a: Region, b: Region, tol: float = 1e-9) -> bool:
    """Equality up to a symmetric difference of mu-measure below ``tol``."""
    return symmetric_difference_measure(a, b) < tol


def connected_components(a: Region, gap_tol: float = 1e-9) -> int:
    """Number of components of the closure; pieces within ``gap_tol`` count as touching."""
    nodes = [(i, j) for i, s in enumerate(a.slabs) for j in range(len(s.ys))]
    if not nodes:
        return 0
    index = {n: k for k, n in enumerate(nodes)}
    parent = list(range(len(nodes)))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    def join(u, v):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv

    slabs = a.slabs
    for i, s in enumerate(slabs):
        for j in range(1, len(s.ys)):
            if s.ys[j][0] - s.ys[j - 1][1] <= gap_tol:
                join(index[(i, j - 1)], index[(i, j)])
        for k in range(i + 1, len(slabs)):
            t = slabs[k]
            if t.x_lo - s.x_hi > gap_tol:
                break
            p = r = 0
            while p < len(s.ys) and r < len(t.ys):
                (a0, a1), (b0, b1) = s.ys[p], t.ys[r]
                if a0 <= b1 + gap_tol and b0 <= a1 + gap_tol:
                    join(index[(i, p)], index[(k, r)])
                if a1 < b1:
                    p += 1
                else:
                    r += 1
    return len({find(u) for u in range(len(nodes))})


# --- JSON with 17 significant digits ----------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)) or v is None:
        return json.dumps(None if v is None else bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return json.dumps(str(v))
        return format(v, ".17g") if v != int(v) or abs(v) >= 1e16 else format(v, ".1f")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps17(obj) -> str:
    """JSON text with floats written at 17 significant digits (lossless for doubles)."""
    return _fmt(obj)
