import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from curvmeas import oracle
from curvmeas.errors import NotInDomain, NotOnSet
from curvmeas.projection import (DilationWarning, dilate, is_regular, psi, reach_function, rho,
                                 rho_many)
from curvmeas.scene import AxisBox, Ball, BallComplement, PointCloud, Segment

from conftest import plane

TOL = 1e-6

# union with finite reach everywhere but the medial set
PAIR = plane(Ball([-1.5, 0], 1.0), Ball([1.5, 0.3], 0.7), Segment([-1, 2], [1, 2.5]))


def test_psi_examples(disc, point):
    p = psi(disc, [2, 0])
    assert np.allclose(p.a, [1, 0]) and np.allclose(p.u, [1, 0]) and p.delta == pytest.approx(1)
    p = psi(point, [0, 0.3])
    assert np.allclose(p.a, [0, 0]) and np.allclose(p.u, [0, 1]) and p.delta == pytest.approx(0.3)
    bc = plane(BallComplement([0, 0], 1.0))
    p = psi(bc, [0.5, 0])
    assert np.allclose(p.a, [1, 0]) and np.allclose(p.u, [-1, 0]) and p.delta == pytest.approx(0.5)


def test_psi_invariants(disc):
    p = psi(disc, [0.3, -2.2])
    assert np.allclose(p.a + p.delta * p.u, p.x, atol=1e-10)
    assert abs(np.linalg.norm(p.u) - 1) <= 1e-12


def test_psi_off_domain(two_points, disc):
    with pytest.raises(NotInDomain):
        psi(two_points, [0, 1])
    with pytest.raises(NotInDomain):
        psi(disc, [0.1, 0.1])


def test_rho_examples(disc, two_points):
    assert rho(disc, [2, 0]) == math.inf
    bc = plane(BallComplement([0, 0], 1.0))
    assert rho(bc, [0.5, 0]) == pytest.approx(2.0, abs=TOL)
    assert rho(two_points, [-0.5, 0]) == pytest.approx(2.0, abs=TOL)


def test_rho_matches_dense_scan(two_points):
    # rho = reach / delta, and the scan is an independent route to reach
    x = np.array([-0.5, 0.4])
    p = psi(two_points, x)
    scan = oracle.dense_scan_reach(two_points, p.a, p.u, s_max=10.0)
    assert rho(two_points, x) * p.delta == pytest.approx(scan, rel=1e-4)


def test_reach_function_examples(disc, two_points):
    assert reach_function(disc, [1, 0], [1, 0]) == math.inf
    bc = plane(BallComplement([0, 0], 1.0))
    assert reach_function(bc, [1, 0], [-1, 0]) == pytest.approx(1.0, abs=TOL)
    assert reach_function(disc, [1, 0], [0, 1]) == 0.0
    assert reach_function(two_points, [-1, 0], [1, 0]) == pytest.approx(1.0, abs=TOL)


@pytest.mark.parametrize("a,u", [([1, 0], [-1, 0]), ([0, 1], [0, -1]), ([0.6, 0.8], [-0.6, -0.8])])
def test_reach_function_vs_scan(a, u):
    bc = plane(BallComplement([0, 0], 1.0))
    assert reach_function(bc, a, u) == pytest.approx(oracle.dense_scan_reach(bc, a, u), abs=1e-4)


def test_reach_function_off_set(disc):
    with pytest.raises(NotOnSet):
        reach_function(disc, [2, 0], [1, 0])


def test_dilate_examples(disc, point):
    assert np.allclose(dilate(disc, [2, 0], 0.5), [1.5, 0])
    assert np.allclose(dilate(disc, [0.3, 2.0], 1.0), [0.3, 2.0])
    assert np.allclose(dilate(point, [0, 2], 2), [0, 4])


def test_dilate_warns_past_rho(two_points):
    with pytest.warns(DilationWarning):
        dilate(two_points, [-0.5, 0.0], 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dilate(two_points, [-0.5, 0.0], 1.5)


def test_is_regular_examples(disc, two_points):
    ok, p = is_regular(disc, [2, 0])
    assert ok and p.rho == math.inf
    ok, p = is_regular(two_points, [0, 1])
    assert not ok
    ok, p = is_regular(two_points, [-0.5, 0.4])
    assert ok
    assert np.allclose(p.a, oracle.brute_nearest(two_points, [-0.5, 0.4])[0])


def test_is_regular_rejects_medial_and_set(two_points, square):
    assert not is_regular(two_points, [0.0, 0.3])[0]
    assert not is_regular(square, [0.5, 0.5])[0]


def _sample_outside(scene, rng, k):
    lo, hi = scene.bbox
    X = rng.uniform(lo, hi, size=(4 * k, scene.dim))
    return X[scene.delta_many(X) > 0.05][:k]


def test_rho_is_at_least_one():
    rng = np.random.default_rng(7)
    X = _sample_outside(PAIR, rng, 300)
    r = rho_many(PAIR, X)
    assert np.all(r >= 1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3.5, 3.5), st.floats(-2.5, 4.0), st.floats(0.1, 0.95))
def test_radial_invariance(x0, y0, frac):
    """xi is constant along the normal ray and rho scales like 1/t."""
    x = np.array([x0, y0])
    assume(PAIR.delta_many(x[None])[0] > 0.05)
    try:
        p = psi(PAIR, x)
    except NotInDomain:
        assume(False)
    r = rho(PAIR, x)
    assume(1.05 < r < 1e5)
    t = frac * r
    assume(t > 0.05)
    y = dilate(PAIR, x, t)
    q = psi(PAIR, y)
    assert np.allclose(q.a, p.a, atol=1e-9)
    assert rho(PAIR, y) * t == pytest.approx(r, rel=1e-6)
    assert reach_function(PAIR, p.a, p.u) == pytest.approx(p.delta * r, rel=1e-6)


@pytest.mark.parametrize("lam", [1.5, 2.0, 4.0])
def test_lipschitz_on_a_lambda(lam):
    """On {rho >= lam} the projection is lam/(lam-1)-Lipschitz."""
    rng = np.random.default_rng(11)
    scene = plane(BallComplement([0, 0], 2.0), AxisBox([-0.5, -0.5], [0.5, 0.5]))
    X = _sample_outside(scene, rng, 3000)
    r = rho_many(scene, X)
    keep = X[r >= lam]
    A, _, _ = scene.nearest_many(keep)
    i = rng.integers(0, len(keep), 4000)
    j = rng.integers(0, len(keep), 4000)
    dx = np.linalg.norm(keep[i] - keep[j], axis=1)
    da = np.linalg.norm(A[i] - A[j], axis=1)
    bound = lam / (lam - 1) * dx * (1 + 1e-6) + 1e-12
    assert np.all(da <= bound)


def test_rho_many_off_domain_is_nan(two_points):
    r = rho_many(two_points, np.array([[0.0, 1.0], [-0.5, 0.0]]))
    assert math.isnan(r[0]) and r[1] == pytest.approx(2.0, abs=TOL)


def test_point_cloud_rho_midpoint():
    pc = plane(PointCloud([[0, 0], [4, 0]]))
    assert rho(pc, [1, 0]) == pytest.approx(2.0, abs=TOL)
    assert rho(pc, [0.5, 0]) == pytest.approx(4.0, abs=TOL)
