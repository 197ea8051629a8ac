import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvmeas import oracle
from curvmeas.errors import EmptyScene, NotInDomain, SceneError
from curvmeas.scene import (AxisBox, Ball, BallComplement, ConvexPolytope, Point, PointCloud, Scene,
                            Segment, delta, nearest_set, xi)

from conftest import plane

coord = st.floats(-4, 4, allow_nan=False)
point2 = st.tuples(coord, coord)

MIXED = plane(Ball([0, 0], 1.0), Segment([2, -1], [3, 1]), PointCloud([[-2, 2], [-3, 0.5]]),
              AxisBox([1, 2], [2, 3]), BallComplement([0, 0], 5.0))


def test_delta_examples(disc, point):
    assert delta(disc, [2, 0]) == pytest.approx(1.0, abs=1e-15)
    assert delta(point, [3, 4]) == pytest.approx(5.0, abs=1e-15)
    bc = plane(BallComplement([0, 0], 1.0))
    assert delta(bc, [0.25, 0]) == pytest.approx(0.75, abs=1e-15)


def test_delta_zero_on_set(square, disc):
    assert delta(square, [0.5, 0.5]) == 0.0
    assert delta(square, [1.0, 0.3]) == 0.0
    assert delta(disc, [0.0, 1.0]) == 0.0


def test_nearest_set_examples(segment, two_points, square):
    pts = nearest_set(segment, [0, 1])
    assert len(pts) == 1 and np.allclose(pts[0], [0, 0])
    pts = sorted(p.tolist() for p in nearest_set(two_points, [0, 1]))
    assert np.allclose(pts, [[-1, 0], [1, 0]])
    pts = nearest_set(square, [2, 2])
    assert len(pts) == 1 and np.allclose(pts[0], [1, 1])


def test_xi_examples(disc, two_points):
    assert np.allclose(xi(disc, [2, 0]), [1, 0])
    with pytest.raises(NotInDomain):
        xi(two_points, [0, 1])
    bc = plane(BallComplement([0, 0], 1.0))
    assert np.allclose(xi(bc, [0.5, 0]), [1, 0])


def test_polytope_matches_axis_box():
    box = plane(AxisBox([0, 0], [1, 1]))
    poly = plane(ConvexPolytope([([1, 0], 1), ([-1, 0], 0), ([0, 1], 1), ([0, -1], 0)]))
    X = np.random.default_rng(3).uniform(-2, 3, size=(500, 2))
    assert np.allclose(box.delta_many(X), poly.delta_many(X), atol=1e-12)
    Ab, ub, _ = box.nearest_many(X)
    Ap, up, _ = poly.nearest_many(X)
    assert np.allclose(Ab[ub], Ap[ub], atol=1e-10)


def test_polytope_3d_corner_edge_face():
    cube = Scene(3, [ConvexPolytope([([1, 0, 0], 1), ([-1, 0, 0], 0), ([0, 1, 0], 1),
                                     ([0, -1, 0], 0), ([0, 0, 1], 1), ([0, 0, -1], 0)])])
    assert np.allclose(xi(cube, [2, 2, 2]), [1, 1, 1])
    assert np.allclose(xi(cube, [2, 0.5, 2]), [1, 0.5, 1])
    assert np.allclose(xi(cube, [0.3, 0.5, 3]), [0.3, 0.5, 1])
    assert delta(cube, [2, 2, 2]) == pytest.approx(math.sqrt(3))


@pytest.mark.parametrize("scene", [MIXED, plane(ConvexPolytope([([0, -1], 0.0), ([-1, 0], 0.0),
                                                                 ([2 ** -0.5, 2 ** -0.5], 2 ** -0.5)]))])
def test_delta_agrees_with_oracle(scene):
    X = np.random.default_rng(0).uniform(-6, 6, size=(2000, 2))
    assert np.allclose(scene.delta_many(X), oracle.distance(scene.to_dict(), X), atol=1e-9)


def test_union_is_min_of_shapes():
    X = np.random.default_rng(1).uniform(-6, 6, size=(1000, 2))
    per = np.stack([plane(s).delta_many(X) for s in MIXED.shapes])
    assert np.array_equal(MIXED.delta_many(X), per.min(axis=0))


@settings(max_examples=200, deadline=None)
@given(point2, point2)
def test_delta_is_1_lipschitz(x, y):
    x, y = np.array(x), np.array(y)
    gap = abs(delta(MIXED, x) - delta(MIXED, y))
    assert gap <= np.linalg.norm(x - y) + 1e-12


@settings(max_examples=200, deadline=None)
@given(point2)
def test_nearest_points_are_on_set_and_closest(x):
    tol = 1e-9
    d = delta(MIXED, x)
    for a in nearest_set(MIXED, x, tol):
        assert delta(MIXED, a) <= tol
        assert np.linalg.norm(np.asarray(x) - a) <= d + tol


def test_point_cloud_ties_within_tol():
    pc = plane(PointCloud([[-1, 0], [1, 0], [1, 1e-12]]))
    pts = nearest_set(pc, [0, 1], tol=1e-9)
    assert len(pts) == 2


@pytest.mark.parametrize("bad", [
    lambda: Ball([0, 0], 0.0),
    lambda: BallComplement([0, 0], -1.0),
    lambda: AxisBox([0, 0], [0, 1]),
    lambda: ConvexPolytope([([1.0, 0.1], 1.0)]),
    lambda: ConvexPolytope([([1, 0], 1), ([0, 1], 1)]),
    lambda: Scene(4, [Point([0, 0, 0, 0])]),
    lambda: Scene(2, [Point([0, 0, 0])]),
])
def test_invalid_shapes_rejected(bad):
    with pytest.raises(SceneError):
        bad()


def test_empty_scene():
    with pytest.raises(EmptyScene):
        Scene(2, [])


def test_json_roundtrip(scene_dir):
    for path in sorted(scene_dir.glob("*.json")):
        s = Scene.load(path)
        assert Scene.loads(s.dumps()) == s


def test_json_rejects_unknown_fields():
    with pytest.raises(SceneError, match="unknown"):
        Scene.from_dict({"dim": 2, "shapes": [{"type": "ball", "c": [0, 0], "R": 1, "color": 1}]})
    with pytest.raises(SceneError, match="unknown"):
        Scene.from_dict({"dim": 2, "shapes": [], "extra": 0})
    with pytest.raises(SceneError, match="unknown shape"):
        Scene.from_dict({"dim": 2, "shapes": [{"type": "torus"}]})


def test_malformed_json_has_position():
    text = '{"dim": 2,\n "shapes": [ {"type": "ball", "c": [0,0] "R": 1} ]}'
    with pytest.raises(SceneError, match=r"line 2, column \d+"):
        Scene.loads(text)


def test_scene_json_schema_fields():
    s = plane(Ball([0, 0], 1.0))
    d = json.loads(s.dumps())
    assert set(d) == {"dim", "shapes", "bbox_margin"}
    assert d["shapes"][0] == {"type": "ball", "c": [0.0, 0.0], "R": 1.0}
