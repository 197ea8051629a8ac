import math

import numpy as np
import pytest

from curvmeas import oracle
from curvmeas.bundle import sample_bundle
from curvmeas.errors import InvalidIndex, ReachTooSmall, StratumEmpty
from curvmeas.measures import (alpha, coarea_check, infinite_curvature_census, mu_global,
                               mu_stratified, steiner_fit, strict_stratum_measure)
from curvmeas.scene import AxisBox, Ball, Scene
from curvmeas.strata import classify_bundle

from conftest import plane


def test_alpha():
    assert alpha(0) == 1.0 and alpha(1) == 2.0
    assert alpha(2) == pytest.approx(math.pi)
    assert alpha(3) == pytest.approx(4 * math.pi / 3)
    assert alpha(4) == pytest.approx(math.pi ** 2 / 2)


@pytest.mark.parametrize("name,m,ref,rel", [
    ("disc", 1, math.pi, 1e-2), ("disc", 0, 1.0, 2e-2), ("point", 0, 1.0, 2e-2),
    ("square", 1, 2.0, 1e-2), ("square", 0, 1.0, 2e-2), ("segment", 1, 2.0, 1e-2)])
def test_mu_global_examples(request, name, m, ref, rel):
    est = mu_global(request.getfixturevalue(name), m, grid_res=512)
    assert est.method == "global" and est.stderr >= 0
    assert est.value == pytest.approx(ref, rel=rel)


def test_point_mu1_vanishes(point):
    assert mu_global(point, 1, grid_res=256).value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name,m,ref,rel", [
    ("square", 1, 2.0, 1e-2), ("segment", 1, 2.0, 1e-2), ("square", 0, 1.0, 2e-2),
    ("disc", 1, math.pi, 1e-2), ("disc", 0, 1.0, 2e-2)])
def test_mu_stratified_examples(request, name, m, ref, rel):
    est = mu_stratified(request.getfixturevalue(name), m, grid_res=512)
    assert est.method == "stratified"
    assert est.value == pytest.approx(ref, rel=rel)


def test_top_stratum_is_half_the_fibre_count(square, segment):
    # mu_{n-1}(T) = 1/2 int H^0{v : (z, v) in T} dz
    assert mu_stratified(square, 1, include_higher=False).value == pytest.approx(0.5 * 4, rel=1e-6)
    assert mu_stratified(segment, 1, include_higher=False).value == pytest.approx(0.5 * 2 * 2, rel=1e-6)
    up = lambda a, u: u[:, 1] > 0
    assert mu_stratified(segment, 1, up, include_higher=False).value == pytest.approx(1.0, rel=1e-6)


def test_strict_stratum_empty(disc):
    with pytest.raises(StratumEmpty):
        strict_stratum_measure(disc, 0)


def test_invalid_index(disc):
    with pytest.raises(InvalidIndex):
        mu_global(disc, 2)
    with pytest.raises(InvalidIndex):
        mu_stratified(disc, -1)


@pytest.fixture(scope="module")
def steiner(request):
    out = {}
    for name in ("disc", "square", "segment"):
        out[name] = steiner_fit(request.getfixturevalue(name), grid_res=1024)
    return out


@pytest.mark.parametrize("name,mu1", [("disc", math.pi), ("square", 2.0), ("segment", 2.0)])
def test_steiner_examples(steiner, name, mu1):
    est = steiner[name]
    assert est[1].method == "steiner"
    assert est[1].value == pytest.approx(mu1, rel=1e-2)
    assert est[0].value == pytest.approx(1.0, rel=2e-2)


def test_steiner_needs_reach(two_discs, disc):
    with pytest.raises(ReachTooSmall):
        steiner_fit(two_discs)
    with pytest.raises(ValueError):
        steiner_fit(disc, radii=(0.1, 0.2))


def test_parallel_volume_closed_form():
    for kind, scene in (("disc", plane(Ball([0, 0], 1.0))), ("square", plane(AxisBox([0, 0], [1, 1])))):
        for r in (0.0, 0.3):
            v = oracle.parallel_volume(scene, r, 1024)
            assert v == pytest.approx(oracle.parallel_area_closed_form(kind, r), rel=5e-3)


@pytest.mark.parametrize("name", ["disc", "square", "segment"])
def test_three_way_agreement(request, steiner, name):
    scene = request.getfixturevalue(name)
    for m in (0, 1):
        g = mu_global(scene, m, grid_res=512)
        s = mu_stratified(scene, m, grid_res=512)
        st = steiner[name][m]
        for other in (s, st):
            bound = 3 * math.hypot(g.stderr, other.stderr) + 0.02 * abs(g.value)
            assert abs(g.value - other.value) <= bound


def test_additivity(square):
    b = sample_bundle(square, grid_res=512)
    left = lambda a, u: a[:, 0] < 0.5
    right = lambda a, u: a[:, 0] >= 0.5
    for m in (0, 1):
        whole = mu_global(square, m, bundle=b)
        parts = mu_global(square, m, left, bundle=b).value + mu_global(square, m, right, bundle=b).value
        assert parts == pytest.approx(whole.value, abs=max(whole.stderr, 1e-12))
        s_whole = mu_stratified(square, m)
        s_parts = mu_stratified(square, m, left).value + mu_stratified(square, m, right).value
        assert s_parts == pytest.approx(s_whole.value, abs=max(s_whole.stderr, 1e-9))


def test_coarea_examples(square, disc, segment):
    res = coarea_check(square, 1)
    assert res["lhs"] == pytest.approx(4.0, rel=2e-2) and res["rhs"] == pytest.approx(4.0, rel=2e-2)
    res = coarea_check(disc, 1)
    assert res["lhs"] == pytest.approx(2 * math.pi, rel=2e-2)
    assert res["rhs"] == pytest.approx(2 * math.pi, rel=2e-2)
    up = lambda a, u: (u[:, 1] > 0.5).astype(float)
    res = coarea_check(segment, 1, up)
    assert res["lhs"] == pytest.approx(2.0, rel=2e-2) and res["rhs"] == pytest.approx(2.0, rel=2e-2)
    assert res["gap"] <= 2e-2


def test_census_examples(square, segment, disc):
    corner = classify_bundle(sample_bundle(square, grid_res=512), square)
    assert infinite_curvature_census(corner, m=1, j=0) == pytest.approx(1.0, abs=1e-2)
    ends = classify_bundle(sample_bundle(segment, grid_res=512), segment)
    assert infinite_curvature_census(ends, m=1, j=0) == pytest.approx(1.0, abs=1e-2)
    rim = sample_bundle(disc, grid_res=512)
    assert infinite_curvature_census(rim, m=1, j=1, scene=disc) == pytest.approx(0.0, abs=1e-2)


def test_census_selector(square):
    b = classify_bundle(sample_bundle(square, grid_res=256), square)
    corners = lambda a, u: np.all(np.isclose(a, 0) | np.isclose(a, 1), axis=1)
    assert infinite_curvature_census(b, corners, m=1) == pytest.approx(1.0, abs=1e-2)
    with pytest.raises(InvalidIndex):
        infinite_curvature_census(b, m=2)


def test_ball_3d_measures():
    ball = Scene(3, [Ball([0, 0, 0], 1.0)], 1.0)
    b = sample_bundle(ball, grid_res=64)
    for m, ref in ((2, 2 * math.pi), (1, 4.0), (0, 1.0)):
        assert mu_global(ball, m, bundle=b).value == pytest.approx(ref, rel=1e-2)
        assert mu_stratified(ball, m, grid_res=128).value == pytest.approx(ref, rel=1e-2)


def test_box_3d_measures():
    box = Scene(3, [AxisBox([0, 0, 0], [1, 2, 0.5])], 1.0)
    ref = [oracle.analytic_reference("box", f"mu_{m}", a=1, b=2, c=0.5).value for m in range(3)]
    b = sample_bundle(box, grid_res=64)
    for m in range(3):
        assert mu_global(box, m, bundle=b).value == pytest.approx(ref[m], rel=2e-2)
        assert mu_stratified(box, m, grid_res=128).value == pytest.approx(ref[m], rel=1e-2)
