from pathlib import Path

import pytest

from curvmeas.scene import (AxisBox, Ball, BallComplement, ConvexPolytope, Point, PointCloud, Scene,
                            Segment)

SCENES = Path(__file__).resolve().parent.parent / "scenes"


def plane(*shapes, margin=2.0):
    return Scene(2, list(shapes), margin)


@pytest.fixture
def scene_dir():
    return SCENES


@pytest.fixture(scope="session")
def disc():
    return plane(Ball([0, 0], 1.0))


@pytest.fixture(scope="session")
def square():
    return plane(AxisBox([0, 0], [1, 1]))


@pytest.fixture(scope="session")
def segment():
    return plane(Segment([-1, 0], [1, 0]))


@pytest.fixture(scope="session")
def point():
    return plane(Point([0, 0]))


@pytest.fixture(scope="session")
def two_points():
    return plane(PointCloud([[-1, 0], [1, 0]]))


@pytest.fixture(scope="session")
def disc_complement():
    return plane(BallComplement([0, 0], 1.0), margin=0.5)


@pytest.fixture(scope="session")
def triangle():
    s = 2 ** -0.5
    return plane(ConvexPolytope([([0, -1], 0.0), ([-1, 0], 0.0), ([s, s], s)]))


@pytest.fixture(scope="session")
def two_discs():
    return plane(Ball([-1.5, 0], 1.0), Ball([1.5, 0], 1.0))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance as acc

    if acc.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(acc.RESULTS):
            terminalreporter.write_line(acc.RESULTS[k])
