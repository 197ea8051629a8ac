"""Demo scenes without accuracy claims.

``cantor_staircase(depth)`` is the convex epigraph, cut off by a box, of the
primitive of the depth-``depth`` approximation of the Cantor function.  Its
boundary is a convex polygon whose vertex count doubles with the depth while
the exterior angles shrink.  The set is convex, so every reach value is
infinite and the support measures stay those of a convex polygon; the demo
only exercises the pipeline on many small corners.
"""

from __future__ import annotations

import math

import numpy as np

from .scene import ConvexPolytope, Scene


def cantor_steps(depth: int):
    """Breakpoints and slopes of the depth-``depth`` Cantor staircase on [0, 1].

    Returns ``(x, c)``: the staircase takes the value ``c[i]`` on
    ``[x[i], x[i+1]]`` where it is flat, and is linear in between.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    intervals = [(0.0, 1.0)]
    for _ in range(depth):
        nxt = []
        for a, b in intervals:
            w = (b - a) / 3
            nxt += [(a, a + w), (b - w, b)]
        intervals = nxt
    # gaps between kept intervals carry the constant values k / 2^depth
    flats = [(intervals[i][1], intervals[i + 1][0], (i + 1) / len(intervals))
             for i in range(len(intervals) - 1)]
    return intervals, flats


def _primitive_pieces(depth: int):
    """Linear pieces ``y = s x + b`` of the convex primitive of a
    piecewise-constant staircase with ``2^depth`` steps."""
    intervals, _ = cantor_steps(depth)
    k = len(intervals)
    # step function: value i/k on the i-th kept interval and the gap after it
    knots = [0.0] + [iv[1] for iv in intervals[:-1]] + [1.0]
    pieces = []
    y0 = 0.0
    for i in range(k):
        s = i / (k - 1) if k > 1 else 0.0
        x0, x1 = knots[i], knots[i + 1]
        pieces.append((s, y0 - s * x0))
        y0 += s * (x1 - x0)
    return pieces, y0


def cantor_staircase(depth: int = 3, height: float = 1.5) -> Scene:
    """Convex polygon: epigraph of the staircase primitive inside [0,1] x [., height]."""
    pieces, _ = _primitive_pieces(depth)
    hs = []
    for s, b in pieces:
        nrm = math.hypot(s, 1.0)
        hs.append([[s / nrm, -1.0 / nrm], -b / nrm])
    hs += [[[-1.0, 0.0], 0.0], [[1.0, 0.0], 1.0], [[0.0, 1.0], float(height)]]
    return Scene(2, [ConvexPolytope(hs)])


def run_cantor_demo(depths=(1, 2, 3), grid_res: int = 256) -> list[dict]:
    """Support measures and uncaptured weight for a few staircase depths."""
    from .bundle import sample_bundle
    from .measures import mu_global

    out = []
    for d in depths:
        sc = cantor_staircase(d)
        b = sample_bundle(sc, grid_res=grid_res, radii=[0.25 * 2.0 ** -k for k in range(5)])
        row = {"depth": d, "n_vertices": len(sc.shapes[0].vertices),
               "uncaptured": b.uncaptured, "dropped_area": b.dropped_area}
        for m in range(2):
            row[f"mu_{m}"] = mu_global(sc, m, bundle=b).value
        out.append(row)
    return out


__all__ = ["cantor_steps", "cantor_staircase", "run_cantor_demo"]
