"""Reference values that do not go through the estimators they check.

Distances are evaluated directly from the scene dictionaries (the JSON form)
by loops written separately from :mod:`curvmeas.scene`.  2-d convex polytopes
go through ``scipy.spatial.HalfspaceIntersection`` and ``shapely``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .errors import Unsupported

SUBDIV = {2: 8, 3: 4}


@dataclass(frozen=True)
class ReferenceValue:
    name: str
    value: object
    source: str
    meta: dict = field(default_factory=dict, compare=False)


def _polygon(halfspaces):
    normals = np.array([h[0] for h in halfspaces], dtype=float)
    offsets = np.array([h[1] for h in halfspaces], dtype=float)
    if normals.shape[1] != 2:
        raise Unsupported("the polytope oracle is 2-d only")
    # Chebyshev centre as interior point
    norms = np.linalg.norm(normals, axis=1)
    res = linprog(np.r_[0.0, 0.0, -1.0], A_ub=np.c_[normals, norms], b_ub=offsets,
                  bounds=[(None, None)] * 2 + [(0, None)], method="highs")
    hs = HalfspaceIntersection(np.c_[normals, -offsets], res.x[:2])
    pts = hs.intersections
    ctr = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - ctr[1], pts[:, 0] - ctr[0]))
    return shapely.Polygon(pts[order])


def _shape_distance(sd: dict, X: np.ndarray) -> np.ndarray:
    t = sd["type"]
    if t == "point":
        return np.sqrt(((X - np.asarray(sd["c"])) ** 2).sum(axis=1))
    if t == "point_cloud":
        out = np.full(len(X), np.inf)
        for p in sd["points"]:
            out = np.minimum(out, np.sqrt(((X - np.asarray(p)) ** 2).sum(axis=1)))
        return out
    if t == "segment":
        p, q = np.asarray(sd["p"], float), np.asarray(sd["q"], float)
        d = q - p
        t_ = np.clip(((X - p) @ d) / (d @ d), 0.0, 1.0)
        return np.sqrt(((X - p - t_[:, None] * d) ** 2).sum(axis=1))
    if t == "ball":
        r = np.sqrt(((X - np.asarray(sd["c"])) ** 2).sum(axis=1))
        return np.maximum(r - sd["R"], 0.0)
    if t == "ball_complement":
        r = np.sqrt(((X - np.asarray(sd["c"])) ** 2).sum(axis=1))
        return np.maximum(sd["R"] - r, 0.0)
    if t == "axis_box":
        lo, hi = np.asarray(sd["lo"], float), np.asarray(sd["hi"], float)
        g = np.maximum(np.maximum(lo - X, X - hi), 0.0)
        return np.sqrt((g ** 2).sum(axis=1))
    if t == "convex_polytope":
        poly = _polygon(sd["halfspaces"])
        return shapely.distance(poly, shapely.points(X))
    raise Unsupported(f"no oracle for shape type {t!r}")


def distance(scene_dict: dict, X) -> np.ndarray:
    """Distance to the union of the shapes in ``scene_dict``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.full(len(X), np.inf)
    for sd in scene_dict["shapes"]:
        out = np.minimum(out, _shape_distance(sd, X))
    return out


def _as_dict(scene):
    return scene if isinstance(scene, dict) else scene.to_dict()


def _support(sd: dict):
    t = sd["type"]
    if t in ("point",):
        c = np.asarray(sd["c"], float)
        return c, c
    if t == "point_cloud":
        P = np.asarray(sd["points"], float)
        return P.min(axis=0), P.max(axis=0)
    if t == "segment":
        P = np.asarray([sd["p"], sd["q"]], float)
        return P.min(axis=0), P.max(axis=0)
    if t == "ball":
        c = np.asarray(sd["c"], float)
        return c - sd["R"], c + sd["R"]
    if t == "axis_box":
        return np.asarray(sd["lo"], float), np.asarray(sd["hi"], float)
    if t == "convex_polytope":
        b = _polygon(sd["halfspaces"]).bounds
        return np.array(b[:2]), np.array(b[2:])
    raise Unsupported(f"parallel volume of {t!r} is unbounded or unsupported")


def parallel_volume(scene, r: float, grid_res: int = 1024) -> float:
    """Lebesgue measure of ``{x : delta(x) <= r}`` by cell counting.

    Cells whose centre distance is within half a cell diagonal of ``r`` are
    split into ``SUBDIV[n]^n`` sub-cells; all others are classified exactly
    because the distance is 1-Lipschitz.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    d = _as_dict(scene)
    n = int(d["dim"])
    lows, highs = zip(*(_support(s) for s in d["shapes"]))
    lo = np.min(lows, axis=0) - r
    hi = np.max(highs, axis=0) + r
    ctr = 0.5 * (lo + hi)
    half = 0.5 * float((hi - lo).max()) * (1 + 2.0 / grid_res) + 1e-9
    h = 2 * half / grid_res
    # cell centres at odd multiples of h/2 around the box centre
    axes = [c - half + h * (np.arange(grid_res) + 0.5) for c in ctr]
    cell = h ** n
    diag = 0.5 * h * math.sqrt(n)
    k = SUBDIV[n]
    sub = (np.arange(k) + 0.5) / k - 0.5
    offs = np.stack(np.meshgrid(*([sub] * n), indexing="ij"), axis=-1).reshape(-1, n) * h
    total = 0.0
    # sweep slabs along the first axis
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, n - 1)
    for x0 in axes[0]:
        C = np.c_[np.full(len(rest), x0), rest]
        dist = distance(d, C)
        inside = dist <= r - diag
        edge = np.abs(dist - r) <= diag
        total += inside.sum() * cell
        if edge.any():
            E = C[edge]
            S = (E[:, None, :] + offs[None]).reshape(-1, n)
            ds = distance(d, S)
            total += (ds <= r).sum() * cell / len(offs)
    return float(total)


def dense_scan_reach(scene, a, u, s_max: float = 10.0, steps: int = 20000,
                     tol: float = 1e-9) -> float:
    """First ``s`` where ``delta(a + s u) < s``; ``inf`` if none up to ``s_max``."""
    if steps < 10**4:
        raise ValueError("steps must be at least 1e4")
    d = _as_dict(scene)
    a = np.asarray(a, float)
    u = np.asarray(u, float)
    s = np.linspace(0.0, s_max, steps + 1)[1:]
    viol = distance(d, a + s[:, None] * u) < s - tol * np.maximum(s, 1.0)
    if not viol.any():
        return math.inf
    i = int(np.argmax(viol))
    lo = 0.0 if i == 0 else s[i - 1]
    hi = s[i]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if distance(d, (a + mid * u)[None])[0] >= mid - tol * max(mid, 1.0):
            lo = mid
        else:
            hi = mid
    return float(lo)


def brute_nearest(scene, x, samples: int = 200000) -> np.ndarray:
    """Nearest points of ``A`` to ``x`` found on a dense boundary sampling.

    Returns every sample within one sampling step of the minimum distance.
    """
    d = _as_dict(scene)
    n = int(d["dim"])
    x = np.asarray(x, float)
    pts = []
    for sd in d["shapes"]:
        t = sd["type"]
        if t == "point":
            pts.append(np.asarray([sd["c"]], float))
        elif t == "point_cloud":
            pts.append(np.asarray(sd["points"], float))
        elif t == "segment":
            tt = np.linspace(0, 1, samples)
            p, q = np.asarray(sd["p"], float), np.asarray(sd["q"], float)
            pts.append(p + tt[:, None] * (q - p))
        elif t in ("ball", "ball_complement") and n == 2:
            th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
            pts.append(np.asarray(sd["c"]) + sd["R"] * np.c_[np.cos(th), np.sin(th)])
        else:
            raise Unsupported(f"brute-force nearest point for {t!r}")
    P = np.concatenate(pts)
    D = np.linalg.norm(P - x, axis=1)
    return P[D <= D.min() + 1e-9]


def _mu(kind, m, p):
    if kind == "disc":
        return {1: math.pi * p.get("R", 1.0), 0: 1.0}[m]
    if kind in ("square", "rectangle"):
        a = p.get("a", 1.0)
        b = p.get("b", a)
        return {1: a + b, 0: 1.0}[m]
    if kind == "segment":
        return {1: p.get("L", 2.0), 0: 1.0}[m]
    if kind == "point":
        return 1.0 if m == 0 else 0.0
    if kind == "ball":
        R = p.get("R", 1.0)
        return {2: 2 * math.pi * R * R, 1: 4 * R, 0: 1.0}[m]
    if kind == "box":
        a, b, c = p.get("a", 1.0), p.get("b", 1.0), p.get("c", 1.0)
        return {2: a * b + b * c + c * a, 1: a + b + c, 0: 1.0}[m]
    if kind == "torus":
        R0, r0 = p.get("R0", 2.0), p.get("r0", 0.5)
        return {2: 2 * math.pi ** 2 * R0 * r0, 1: 2 * math.pi * R0, 0: 0.0}[m]
    raise Unsupported(f"no support measures for {kind!r}")


def analytic_reference(kind: str, quantity: str, **params) -> ReferenceValue:
    """Closed-form reference values.

    ``kind`` is one of disc, square, segment, point, ball, box, sphere, torus
    (with parameters R, a/b/c, L, R0/r0); ``quantity`` one of perimeter, area,
    bundle_length, principal_curvatures or ``mu_<m>``.
    """
    name = f"{kind}:{quantity}"
    R = params.get("R", 1.0)
    if quantity.startswith("mu_"):
        try:
            m = int(quantity[3:])
            return ReferenceValue(name, _mu(kind, m, params), "closed_form")
        except (KeyError, ValueError):
            raise Unsupported(name) from None
    table = {
        ("disc", "perimeter"): lambda: 2 * math.pi * R,
        ("disc", "area"): lambda: math.pi * R * R,
        ("disc", "bundle_length"): lambda: 2 * math.pi * math.sqrt(R * R + 1),
        ("disc", "principal_curvatures"): lambda: (1.0 / R,),
        ("point", "bundle_length"): lambda: 2 * math.pi,
        ("point", "area"): lambda: 0.0,
        ("square", "perimeter"): lambda: 4 * params.get("a", 1.0),
        ("square", "area"): lambda: params.get("a", 1.0) ** 2,
        ("square", "bundle_length"): lambda: 4 * params.get("a", 1.0) + 2 * math.pi,
        ("segment", "bundle_length"): lambda: 2 * params.get("L", 2.0) + 2 * math.pi,
        ("segment", "area"): lambda: 0.0,
        ("ball", "area"): lambda: 4 * math.pi * R * R,
        ("ball", "bundle_area"): lambda: 4 * math.pi * (R * R + 1),
        ("sphere", "principal_curvatures"): lambda: (1.0 / R, 1.0 / R),
        ("torus", "principal_curvatures"): lambda: (
            1.0 / (params.get("R0", 2.0) + params.get("r0", 0.5)), 1.0 / params.get("r0", 0.5)),
    }
    fn = table.get((kind, quantity))
    if fn is None:
        raise Unsupported(name)
    return ReferenceValue(name, fn(), "closed_form")


def parallel_area_closed_form(kind: str, r: float, **p) -> float:
    """Area of the ``r``-parallel set of simple planar shapes."""
    if kind == "disc":
        R = p.get("R", 1.0)
        return math.pi * (R + r) ** 2
    if kind == "segment":
        return 2 * p.get("L", 2.0) * r + math.pi * r * r
    if kind == "point":
        return math.pi * r * r
    if kind == "square":
        a = p.get("a", 1.0)
        return a * a + 4 * a * r + math.pi * r * r
    raise Unsupported(kind)


__all__ = [
    "ReferenceValue", "distance", "parallel_volume", "dense_scan_reach", "brute_nearest",
    "analytic_reference", "parallel_area_closed_form",
]
