"""Monte Carlo clouds of the planar map, containment tests and CSV/SVG emitters."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .core import Params
from .natext import t2_array
from .region import Region

#: Most points drawn in an SVG figure.
SVG_MAX_POINTS = 20_000


@dataclass
class PointCloud:
    x: np.ndarray
    y: np.ndarray
    params: Params
    seed: int
    burn_in: int
    restarts: int = 0

    def __len__(self) -> int:
        return len(self.x)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def simulate(p: Params, n: int, burn_in: int = 1000, seed: int = 0, chains: int = 1000) -> PointCloud:
    """Orbit points of the planar map after ``burn_in`` steps.

    ``chains`` independent orbits start at uniform points of
    ``I_alpha x [0, 1)`` (numpy PCG64 seeded with ``seed``) and are advanced
    together; the cloud is their points interleaved step by step and cut to
    ``n``.  An orbit landing on 0 is restarted from a fresh point.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    chains = max(1, min(chains, n))
    x = rng.uniform(p.lo, p.hi, chains)
    y = rng.uniform(0.0, 1.0, chains)
    restarts = 0
    steps = -(-n // chains)
    xs = np.empty((steps, chains))
    ys = np.empty((steps, chains))
    for i in range(burn_in + steps):
        bad = np.abs(x) < 1e-15
        if bad.any():
            k = int(bad.sum())
            restarts += k
            x[bad] = rng.uniform(p.lo, p.hi, k)
            y[bad] = rng.uniform(0.0, 1.0, k)
        x, y = t2_array(p, x, y)
        if i >= burn_in:
            xs[i - burn_in] = x
            ys[i - burn_in] = y
    return PointCloud(xs.ravel()[:n], ys.ravel()[:n], p, seed, burn_in, restarts)


def containment(cloud: PointCloud, region: Region) -> float:
    """Fraction of the cloud inside ``region``."""
    if len(cloud) == 0:
        return 0.0
    return float(np.mean(region.contains(cloud.x, cloud.y)))


def to_csv(cloud: PointCloud) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for a, b in zip(cloud.x.tolist(), cloud.y.tolist()):
        w.writerow([format(a, ".17g"), format(b, ".17g")])
    return buf.getvalue()


def read_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["x", "y"]:
        raise ValueError("expected a header 'x,y'")
    return np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)


def to_svg(cloud: PointCloud | None = None, regions: list[Region] | None = None, width: int = 800,
           height: int = 600, seed: int = 0) -> str:
    """Region outlines plus (at most ``SVG_MAX_POINTS``) cloud points."""
    regions = regions or []
    xs, ys = [], []
    for r in regions:
        if not r.is_empty:
            x0, x1, y0, y1 = r.bbox()
            xs += [x0, x1]
            ys += [y0, y1]
    if cloud is not None and len(cloud):
        xs += [float(cloud.x.min()), float(cloud.x.max())]
        ys += [float(cloud.y.min()), float(cloud.y.max())]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad = 20
    sx = (width - 2 * pad) / max(x1 - x0, 1e-12)
    sy = (height - 2 * pad) / max(y1 - y0, 1e-12)

    def px(x):
        return pad + (x - x0) * sx

    def py(y):
        return height - pad - (y - y0) * sy

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if cloud is not None and len(cloud):
        idx = np.arange(len(cloud))
        if len(idx) > SVG_MAX_POINTS:
            idx = np.sort(np.random.default_rng(seed).choice(idx, SVG_MAX_POINTS, replace=False))
        out.append('<g fill="black" fill-opacity="0.5">')
        out += [f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="0.6"/>'
                for a, b in zip(cloud.x[idx].tolist(), cloud.y[idx].tolist())]
        out.append("</g>")
    colours = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"]
    for i, r in enumerate(regions):
        out.append(f'<g fill="none" stroke="{colours[i % len(colours)]}" stroke-width="1">')
        for a, b, c, d in r.to_array().tolist():
            out.append(f'<rect x="{px(a):.2f}" y="{py(d):.2f}" width="{(b - a) * sx:.2f}" '
                       f'height="{(d - c) * sy:.2f}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
