import math

import numpy as np
import pytest

from curvmeas.bundle import sample_bundle
from curvmeas.errors import NotOnSet
from curvmeas.scene import AxisBox, Ball, Scene
from curvmeas.strata import (classify_bundle, classify_many, classify_stratum, direction_set,
                             restrict_bundle)


def brute_dis_dim(scene, a, s=1e-3, k=4096):
    """Dense direction grid: dimension of the span of accepted directions."""
    n = scene.dim
    if n == 2:
        th = np.linspace(0, 2 * math.pi, k, endpoint=False)
        U = np.c_[np.cos(th), np.sin(th)]
    else:
        U = np.random.default_rng(1).normal(size=(k, 3))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
    ok = scene.delta_many(np.asarray(a) + s * U) >= s * (1 - 1e-3)
    if not ok.any():
        return 0
    return int(np.linalg.matrix_rank(U[ok], tol=0.1 * math.sqrt(ok.sum())))


def test_examples(disc, square, segment):
    lab = classify_stratum(disc, [0.6, 0.8])
    assert lab.m == 1 and lab.dis_dim == 1
    lab = classify_stratum(square, [1.0, 1.0])
    assert lab.m == 0 and lab.dis_dim == 2
    lab = classify_stratum(segment, [0.3, 0.0])
    assert lab.m == 1 and lab.dis_dim == 1
    for lab in (classify_stratum(square, [0.5, 0.0]), classify_stratum(segment, [-1, 0])):
        assert lab.m + lab.dis_dim == 2 and 0 <= lab.confidence <= 1


@pytest.mark.parametrize("a", [[1.0, 1.0], [0.0, 0.4], [0.7, 1.0]])
def test_square_against_dense_grid(square, a):
    assert classify_stratum(square, a).dis_dim == brute_dis_dim(square, a)


def test_segment_endpoint_and_interior(segment):
    assert classify_stratum(segment, [1.0, 0.0]).m == 0
    assert brute_dis_dim(segment, [1.0, 0.0]) == 2
    assert brute_dis_dim(segment, [0.2, 0.0]) == 1


def test_interior_point_has_no_normals(square):
    lab = classify_stratum(square, [0.5, 0.5])
    assert lab.dis_dim == 0 and lab.m == 2


def test_not_on_set(disc):
    with pytest.raises(NotOnSet):
        classify_stratum(disc, [2.0, 0.0])


def test_box_3d_strata():
    cube = Scene(3, [AxisBox([0, 0, 0], [1, 1, 1])], 1.0)
    m, dis, _ = classify_many(cube, [[1, 1, 1], [1, 0.5, 1], [0.3, 0.5, 1], [0, 0, 0.8]])
    assert m.tolist() == [0, 1, 2, 1]
    assert brute_dis_dim(cube, [1, 0.5, 1]) == 2


def test_direction_set_seeded():
    for n, K in ((2, 256), (3, 2048)):
        D = direction_set(n, K, seed=4)
        assert D.shape == (K, n)
        assert np.allclose(np.linalg.norm(D, axis=1), 1.0)
        assert np.array_equal(D, direction_set(n, K, seed=4))
        assert not np.array_equal(D, direction_set(n, K, seed=5))


def test_restrict_square(square):
    b = sample_bundle(square, grid_res=512)
    h = 5.0 / 512
    edges = restrict_bundle(b, 1, square)
    corners = restrict_bundle(b, 0, square)
    # base points over edge interiors, outside a two-cell exclusion zone
    on_corner = np.all(np.isclose(edges.a, 0) | np.isclose(edges.a, 1), axis=1)
    assert not on_corner.any()
    assert np.all(np.all(np.isclose(corners.a, 0) | np.isclose(corners.a, 1), axis=1))
    assert corners.total_weight == pytest.approx(2 * math.pi, rel=1e-3)
    assert edges.total_weight == pytest.approx(4.0, rel=1e-3)
    far = np.abs(edges.a - np.round(edges.a)).max(axis=1) > 2 * h
    # eight half-open strips of length 2h touch the corners
    assert edges.weight[far].sum() == pytest.approx((1 - 4 * h) * edges.total_weight, abs=5e-3)
    # corner fibres fan out over quarter circles
    c = corners.subset(np.all(np.isclose(corners.a, [1, 1]), axis=1))
    assert np.all(c.u >= -1e-9)
    assert np.all(edges.stratum == 1) and np.all(corners.stratum == 0)


def test_restrict_disc_has_no_corners(disc):
    b = sample_bundle(disc, grid_res=256)
    assert len(restrict_bundle(b, 0, disc)) == 0


def test_restrict_needs_scene(square):
    b = sample_bundle(square, grid_res=64)
    with pytest.raises(ValueError):
        restrict_bundle(b, 1)


@pytest.mark.parametrize("name", ["square", "segment", "disc", "two_points"])
def test_partition_and_infinity_pattern(request, name):
    scene = request.getfixturevalue(name)
    b = classify_bundle(sample_bundle(scene, grid_res=512), scene)
    parts = sum(b.weight[b.stratum == m].sum() for m in range(scene.dim))
    assert abs(parts - b.total_weight) <= 5e-3 * b.total_weight
    for m in range(scene.dim):
        w = b.weight[b.stratum == m]
        if w.sum() == 0:
            continue
        k = b.kappa[b.stratum == m]
        if m < k.shape[1]:
            assert w[np.isinf(k[:, m])].sum() >= 0.99 * w.sum()
        if m >= 1:
            assert w[np.isfinite(k[:, m - 1])].sum() >= 0.99 * w.sum()
        # dim T_A(a, u) <= m
        assert np.all(b.m_T[b.stratum == m] <= m)


def test_box_3d_bundle_strata():
    cube = Scene(3, [AxisBox([0, 0, 0], [1, 1, 1])], 1.0)
    b = classify_bundle(sample_bundle(cube, grid_res=32), cube)
    w = [b.weight[b.stratum == m].sum() for m in range(3)]
    # corners 4 pi, edges 12 quarter cylinders of weight 2 * pi/2 each, faces 6
    assert w[0] == pytest.approx(4 * math.pi, rel=2e-2)
    assert w[1] == pytest.approx(6 * math.pi, rel=2e-2)
    assert w[2] == pytest.approx(6.0, rel=2e-2)


def test_ball_3d_single_stratum():
    ball = Scene(3, [Ball([0, 0, 0], 1.0)], 1.0)
    m, _, _ = classify_many(ball, [[1, 0, 0], [0, 0.6, 0.8]])
    assert m.tolist() == [2, 2]
