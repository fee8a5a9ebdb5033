import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from legcap.margin import (
    MarginGraph,
    bang_bang_target,
    min_capture_steps,
    radii,
    radii_bound,
    radii_limit,
    radii_uniform,
)

LN2 = math.log(2)


def test_radii_examples():
    assert radii(1, [LN2]) == pytest.approx([0, 0.5])
    assert radii(1, [LN2, LN2]) == pytest.approx([0, 0.5, 0.75])
    assert radii(1, [math.inf] * 3) == [0, 0, 0, 0]
    assert radii(2.0, []) == [0.0]


def test_radii_errors():
    for bad in ([0.0], [-1.0], [math.nan]):
        with pytest.raises(ValueError):
            radii(1, bad)
    with pytest.raises(ValueError):
        radii(0, [1.0])


def test_radii_uniform_examples():
    assert radii_uniform(1, LN2, 1) == 0
    assert radii_uniform(1, LN2, 3) == pytest.approx(0.75)
    assert radii_limit(1, LN2) == pytest.approx(1.0)
    assert radii_uniform(1, LN2, 200) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        radii_uniform(1, LN2, 0)


@given(L=st.floats(0.01, 10), delta=st.floats(0.01, 5))
def test_uniform_closed_form_matches_recursion(L, delta):
    rec = radii(L, [delta] * 49)
    for n in range(1, 51):
        assert rec[n - 1] == pytest.approx(radii_uniform(L, delta, n),
                                           rel=1e-12, abs=1e-12 * L)


@given(L=st.floats(0.01, 10), delta=st.floats(0.05, 5))
def test_uniform_strictly_increasing(L, delta):
    # keep the per-step gain above double-precision resolution
    top = min(20, int(30 / delta) + 1)
    r = radii(L, [delta] * (top - 1))
    assert all(b > a for a, b in zip(r, r[1:]))
    # each added step widens the disc by L * exp(-(N-1) delta)
    for n in range(2, min(top, int(15 / delta) + 1) + 1):
        assert r[n - 1] - r[n - 2] == pytest.approx(
            L * math.exp(-(n - 1) * delta), rel=1e-6)


@given(L=st.floats(0.01, 10), margins=st.lists(st.floats(0.01, 10),
                                                min_size=1, max_size=30))
def test_bounded(L, margins):
    bound = radii_bound(L, margins)
    assert all(0 <= r <= bound * (1 + 1e-12) for r in radii(L, margins))


@pytest.mark.parametrize("L, first", [(1.0, LN2), (0.5, 0.3), (2.0, 1.5)])
def test_large_margin_shrinks_radius(L, first):
    r_prev = radii(L, [first])[-1]
    threshold = math.log((L + r_prev) / r_prev)
    r = radii(L, [first, threshold * 1.01])
    assert r[-1] < r[-2]
    # at the threshold itself the radius holds
    r = radii(L, [first, threshold])
    assert r[-1] == pytest.approx(r[-2], rel=1e-12)


def test_min_capture_steps_examples():
    graph = MarginGraph.uniform(0.0, 1.0, LN2, 4)
    assert min_capture_steps(0.7, 0.0, graph) == 1
    assert min_capture_steps(1.0, 0.0, graph) == 1
    assert min_capture_steps(1.5, 0.0, graph) == 2
    assert min_capture_steps(1.0 + 0.75, 0.0, graph) == 3
    assert min_capture_steps(1.6, 0.0, graph) == 3
    assert min_capture_steps(1.0 + radii_limit(1.0, LN2) + 0.01, 0.0,
                             graph) is None
    assert min_capture_steps(1.9, 0.0, graph) is None


def test_min_capture_steps_planar():
    graph = MarginGraph.uniform([0.0, 0.0], 1.0, LN2, 3)
    ankle = np.array([0.9, 1.2])       # distance 1.5 = L + R_2
    assert min_capture_steps([0.0, 0.0], ankle, graph) == 2
    assert min_capture_steps([0.0, 0.0], ankle * 1.01, graph) == 3
    assert min_capture_steps([0.0, 0.0], ankle * 2, graph) is None


def test_min_capture_steps_agrees_with_sampling():
    # disc intersection check by brute-force sampling of the reachable disc
    rng = np.random.default_rng(2)
    graph = MarginGraph.build([0.0, 0.0], 0.8, [0.5, 1.0, 0.7])
    for _ in range(50):
        ankle = rng.uniform(-2.5, 2.5, 2)
        n = min_capture_steps([0.0, 0.0], ankle, graph)
        ang = rng.uniform(0, 2 * np.pi, 4000)
        rad = 0.8 * np.sqrt(rng.uniform(0, 1, 4000))
        pts = ankle + np.c_[rad * np.cos(ang), rad * np.sin(ang)]
        nearest = np.linalg.norm(pts, axis=1).min()
        hits = [i + 1 for i, r in enumerate(graph.radii) if nearest <= r]
        if hits:
            assert n is not None and n <= hits[0]


def test_bang_bang_target():
    graph = MarginGraph.uniform(0.0, 1.0, LN2, 4)
    assert bang_bang_target(0.4, 0.0, graph) == 0.4
    assert bang_bang_target(0.0, 0.0, graph) == 0.0
    assert bang_bang_target(1.5, 0.0, graph) == pytest.approx(1.0)
    assert bang_bang_target(-1.5, 0.2, graph) == pytest.approx(-0.8)
    assert bang_bang_target(5.0, 0.0, graph) is None
    planar = MarginGraph.uniform([0.0, 0.0], 0.5, 0.2, 4)
    # ICP at distance 2L from the ankle
    target = bang_bang_target([0.6, 0.8], [0.0, 0.0], planar)
    np.testing.assert_allclose(target, [0.3, 0.4])


def test_graph_files(tmp_path):
    graph = MarginGraph.uniform([0.1, -0.2], 1.0, LN2, 4)
    graph.to_csv(tmp_path / "radii.csv")
    lines = (tmp_path / "radii.csv").read_text().splitlines()
    assert lines[0] == "n,radius"
    assert [float(ln.split(",")[1]) for ln in lines[1:]] == pytest.approx(
        [0, 0.5, 0.75, 0.875])
    graph.to_svg(tmp_path / "g.svg", ankle=[1.0, 0.0])
    root = ET.parse(tmp_path / "g.svg").getroot()
    circles = root.findall("{http://www.w3.org/2000/svg}circle")
    assert len(circles) == 1 + 3 + 1
    assert graph.n_max == 4
