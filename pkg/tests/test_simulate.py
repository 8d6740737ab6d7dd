import numpy as np
import pytest

from rosenquilt.core import Params
from rosenquilt.natext import omega_half, quilt
from rosenquilt.region import Region
from rosenquilt.simulate import SVG_MAX_POINTS, PointCloud, containment, read_csv, simulate, to_csv, to_svg


def test_deterministic():
    a = simulate(Params(5, 0.45), 5000, 100, seed=7)
    b = simulate(Params(5, 0.45), 5000, 100, seed=7)
    assert np.array_equal(a.points, b.points)
    c = simulate(Params(5, 0.45), 5000, 100, seed=8)
    assert not np.array_equal(a.points, c.points)
    assert len(a) == 5000


def test_rejects_empty():
    with pytest.raises(ValueError):
        simulate(Params(3, 0.5), 0)


def test_containment_trivial():
    region = Region.from_rects([(0, 1, 0, 1)])
    rng = np.random.default_rng(0)
    cloud = PointCloud(rng.uniform(0, 1, 1000), rng.uniform(0, 1, 1000), Params(3, 0.5), 0, 0)
    assert containment(cloud, region) == 1.0
    assert containment(cloud, Region.empty()) == 0.0


def test_cloud_inside_domain():
    p = Params(8, 0.48)
    cloud = simulate(p, 100_000, 1000, seed=0)
    assert containment(cloud, quilt(p).omega_alpha) >= 0.999
    assert containment(simulate(Params(3, 0.5), 20_000), omega_half(3)) >= 0.999


def test_csv_roundtrip():
    cloud = simulate(Params(9, 0.49), 3000, 10, seed=2)
    text = to_csv(cloud)
    assert text.startswith("x,y\n")
    assert np.array_equal(read_csv(text), cloud.points)
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


def test_svg_subsamples():
    cloud = simulate(Params(4, 0.45), 50_000, 10)
    svg = to_svg(cloud, [omega_half(4)])
    assert svg.startswith("<svg") and svg.count("<circle") == SVG_MAX_POINTS
    assert svg.count("<rect") == 1 + len(omega_half(4).to_array())
