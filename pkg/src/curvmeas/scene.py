"""Closed sets as finite unions of primitives with exact distance oracles.

Every primitive answers two batched queries on an ``(N, n)`` point array:

* ``distance(X)`` -- exact Euclidean distance to the primitive's set,
* ``candidates(X)`` -- ``(D, P)`` with ``D`` of shape ``(N, K)`` and ``P`` of
  shape ``(N, K, n)``: the ``K`` candidate nearest points of the primitive and
  their distances.  Primitives whose projection is multivalued somewhere (point
  clouds, ball complements at the centre) return more than one candidate.

The union of the primitives is a :class:`Scene`.  Scenes are immutable.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import EmptyScene, NotInDomain, SceneError

DEFAULT_TOL = 1e-9
_CHUNK = 1 << 16


def _vec(v: Any, dim: int | None = None, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise SceneError(f"{name} must be a finite 1-d vector, got {v!r}")
    if dim is not None and arr.shape[0] != dim:
        raise SceneError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def _complement_basis(vectors: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of ``vectors``."""
    if vectors.size == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(np.atleast_2d(vectors), full_matrices=True)
    rank = int(np.sum(s > 1e-12 * max(s.max(), 1.0)))
    return vt[rank:].T.copy()


# ---------------------------------------------------------------------------
# strata pieces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StratumPiece:
    """A smooth piece of a primitive's boundary with known dimension ``m``.

    ``sample(h)`` returns quadrature nodes ``Z`` (K, n), their ``H^m`` weights
    (K,) and an orthonormal basis of the normal space at each node, shape
    (K, n, n - m).
    """

    m: int
    kind: str
    data: tuple
    dim: int

    def sample(self, h: float):
        n = self.dim
        if self.kind == "point":
            c = np.asarray(self.data[0], float)
            return c[None, :], np.ones(1), np.eye(n)[None, :, :]
        if self.kind == "segment":
            p, q = (np.asarray(v, float) for v in self.data)
            d = q - p
            length = float(np.linalg.norm(d))
            k = max(int(math.ceil(length / h)), 1)
            t = (np.arange(k) + 0.5) / k
            Z = p + t[:, None] * d
            nb = _complement_basis(d[None, :] / length, n)
            return Z, np.full(k, length / k), np.broadcast_to(nb, (k, n, n - 1)).copy()
        if self.kind == "sphere":
            c = np.asarray(self.data[0], float)
            R = float(self.data[1])
            if n == 2:
                k = max(int(math.ceil(2 * math.pi * R / h)), 16)
                th = 2 * math.pi * (np.arange(k) + 0.5) / k
                U = np.stack([np.cos(th), np.sin(th)], axis=1)
                return c + R * U, np.full(k, 2 * math.pi * R / k), U[:, :, None]
            nz = max(int(math.ceil(math.pi * R / h)), 8)
            zs = -1 + (2 * np.arange(nz) + 1) / nz
            band = 4 * math.pi * R * R / nz
            pts, wts = [], []
            for z in zs:
                rho = math.sqrt(max(1 - z * z, 0.0))
                k = max(int(math.ceil(2 * math.pi * R * rho / h)), 8)
                ph = 2 * math.pi * (np.arange(k) + 0.5) / k
                pts.append(np.stack([rho * np.cos(ph), rho * np.sin(ph), np.full(k, z)], axis=1))
                wts.append(np.full(k, band / k))
            U = np.concatenate(pts)
            return c + R * U, np.concatenate(wts), U[:, :, None]
        if self.kind == "polygon":
            verts = np.asarray(self.data[0], float)
            normal = np.asarray(self.data[1], float)
            pts, wts = [], []
            for i in range(1, len(verts) - 1):
                tri = verts[[0, i, i + 1]]
                area = 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
                edge = max(np.linalg.norm(tri[1] - tri[0]), np.linalg.norm(tri[2] - tri[1]),
                           np.linalg.norm(tri[0] - tri[2]))
                k = max(int(math.ceil(edge / h)), 1)
                # centroids of the k^2 congruent sub-triangles
                bary = []
                for a in range(k):
                    for b in range(k - a):
                        bary.append(((a + 1 / 3) / k, (b + 1 / 3) / k))
                        if a + b < k - 1:
                            bary.append(((a + 2 / 3) / k, (b + 2 / 3) / k))
                bary = np.asarray(bary)
                P = tri[0] + bary[:, :1] * (tri[1] - tri[0]) + bary[:, 1:] * (tri[2] - tri[0])
                pts.append(P)
                wts.append(np.full(len(P), area / (k * k)))
            Z = np.concatenate(pts)
            return Z, np.concatenate(wts), np.broadcast_to(normal[:, None], (len(Z), n, 1)).copy()
        raise SceneError(f"unknown piece kind {self.kind}")


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


class Shape:
    """Base class for primitives; subclasses are immutable."""

    kind = "shape"
    dim: int

    def distance(self, X: np.ndarray) -> np.ndarray:
        D, _ = self.candidates(X)
        return D.min(axis=1)

    def candidates(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def pieces(self) -> list[StratumPiece]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def key(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __eq__(self, other):
        return isinstance(other, Shape) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


class Point(Shape):
    kind = "point"

    def __init__(self, c):
        self.c = _vec(c, name="c")
        self.dim = self.c.shape[0]

    def distance(self, X):
        return np.linalg.norm(X - self.c, axis=1)

    def candidates(self, X):
        P = np.broadcast_to(self.c, X.shape)[:, None, :].copy()
        return self.distance(X)[:, None], P

    def bounds(self):
        return self.c.copy(), self.c.copy()

    def pieces(self):
        return [StratumPiece(0, "point", (tuple(self.c),), self.dim)]

    def to_dict(self):
        return {"type": "point", "c": self.c.tolist()}


class PointCloud(Shape):
    kind = "point_cloud"

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0 or not np.all(np.isfinite(pts)):
            raise SceneError("point_cloud needs a nonempty list of finite vectors")
        self.points = pts
        self.dim = pts.shape[1]

    def candidates(self, X):
        diff = X[:, None, :] - self.points[None, :, :]
        D = np.linalg.norm(diff, axis=2)
        P = np.broadcast_to(self.points, (len(X),) + self.points.shape).copy()
        return D, P

    def distance(self, X):
        out = np.full(len(X), np.inf)
        for p in self.points:
            np.minimum(out, np.linalg.norm(X - p, axis=1), out=out)
        return out

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def pieces(self):
        return [StratumPiece(0, "point", (tuple(p),), self.dim) for p in self.points]

    def to_dict(self):
        return {"type": "point_cloud", "points": self.points.tolist()}


class Segment(Shape):
    kind = "segment"

    def __init__(self, p, q):
        self.p = _vec(p, name="p")
        self.q = _vec(q, self.p.shape[0], name="q")
        self.dim = self.p.shape[0]
        self._d = self.q - self.p
        self._dd = float(self._d @ self._d)
        if self._dd == 0.0:
            raise SceneError("segment endpoints coincide; use a point")

    def _foot(self, X):
        t = np.clip((X - self.p) @ self._d / self._dd, 0.0, 1.0)
        return self.p + t[:, None] * self._d

    def candidates(self, X):
        F = self._foot(X)
        return np.linalg.norm(X - F, axis=1)[:, None], F[:, None, :]

    def distance(self, X):
        return np.linalg.norm(X - self._foot(X), axis=1)

    def bounds(self):
        return np.minimum(self.p, self.q), np.maximum(self.p, self.q)

    def pieces(self):
        return [
            StratumPiece(1, "segment", (tuple(self.p), tuple(self.q)), self.dim),
            StratumPiece(0, "point", (tuple(self.p),), self.dim),
            StratumPiece(0, "point", (tuple(self.q),), self.dim),
        ]

    def to_dict(self):
        return {"type": "segment", "p": self.p.tolist(), "q": self.q.tolist()}


class Ball(Shape):
    kind = "ball"

    def __init__(self, c, R):
        self.c = _vec(c, name="c")
        self.R = float(R)
        self.dim = self.c.shape[0]
        if not (self.R > 0 and math.isfinite(self.R)):
            raise SceneError(f"ball radius must be positive, got {R!r}")

    def distance(self, X):
        return np.maximum(np.linalg.norm(X - self.c, axis=1) - self.R, 0.0)

    def candidates(self, X):
        v = X - self.c
        r = np.linalg.norm(v, axis=1)
        D = np.maximum(r - self.R, 0.0)
        F = X.copy()
        out = r > self.R
        F[out] = self.c + self.R * v[out] / r[out, None]
        return D[:, None], F[:, None, :]

    def bounds(self):
        return self.c - self.R, self.c + self.R

    def pieces(self):
        return [StratumPiece(self.dim - 1, "sphere", (tuple(self.c), self.R), self.dim)]

    def to_dict(self):
        return {"type": "ball", "c": self.c.tolist(), "R": self.R}


class BallComplement(Shape):
    """The closed set R^n minus the open ball U(c, R)."""

    kind = "ball_complement"

    def __init__(self, c, R):
        self.c = _vec(c, name="c")
        self.R = float(R)
        self.dim = self.c.shape[0]
        if not (self.R > 0 and math.isfinite(self.R)):
            raise SceneError(f"ball_complement radius must be positive, got {R!r}")

    def distance(self, X):
        return np.maximum(self.R - np.linalg.norm(X - self.c, axis=1), 0.0)

    def candidates(self, X):
        v = X - self.c
        r = np.linalg.norm(v, axis=1)
        inside = r < self.R
        D = np.stack([np.maximum(self.R - r, 0.0), np.full(len(X), np.inf)], axis=1)
        P = np.stack([X, X], axis=1)
        e = np.zeros(self.dim)
        e[0] = 1.0
        safe = np.where(r[:, None] > 0, v / np.where(r > 0, r, 1.0)[:, None], e)
        P[inside, 0] = self.c + self.R * safe[inside]
        # the antipodal foot ties with the radial foot only at the centre
        P[inside, 1] = self.c - self.R * safe[inside]
        D[inside, 1] = self.R + r[inside]
        return D, P

    def bounds(self):
        return self.c - self.R, self.c + self.R

    def pieces(self):
        return [StratumPiece(self.dim - 1, "sphere", (tuple(self.c), self.R), self.dim)]

    def to_dict(self):
        return {"type": "ball_complement", "c": self.c.tolist(), "R": self.R}


class ConvexPolytope(Shape):
    """Bounded intersection of halfspaces ``{x : v . x <= b}``.

    The nearest point is found by enumerating every face (active set of at
    most ``n`` halfspaces), projecting onto its affine hull and keeping the
    closest KKT-feasible projection.
    """

    kind = "convex_polytope"

    def __init__(self, halfspaces):
        try:
            normals = np.asarray([h[0] for h in halfspaces], dtype=float)
            offsets = np.asarray([h[1] for h in halfspaces], dtype=float)
        except (TypeError, IndexError, ValueError) as exc:
            raise SceneError(f"halfspaces must be [[normal, offset], ...]: {exc}") from None
        if normals.ndim != 2 or len(normals) == 0:
            raise SceneError("convex_polytope needs at least one halfspace")
        if not np.all(np.abs(np.linalg.norm(normals, axis=1) - 1.0) <= 1e-12):
            raise SceneError("halfspace normals must be unit vectors")
        self.normals = normals
        self.offsets = offsets
        self.dim = normals.shape[1]
        self._eps = 1e-10 * (1.0 + np.abs(offsets).max())
        self._faces = []
        for k in range(1, self.dim + 1):
            for S in itertools.combinations(range(len(normals)), k):
                VS = normals[list(S)]
                if np.linalg.matrix_rank(VS, tol=1e-10) < k:
                    continue
                G = np.linalg.inv(VS @ VS.T)
                self._faces.append((VS, offsets[list(S)], G))
        self._check_bounded()
        self.vertices = self._vertices()

    def _check_bounded(self):
        from scipy.optimize import linprog

        for i in range(self.dim):
            for sign in (1.0, -1.0):
                c = np.zeros(self.dim)
                c[i] = sign
                res = linprog(c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * self.dim)
                if res.status == 2:
                    raise SceneError("convex_polytope is empty")
                if res.status == 3:
                    raise SceneError("convex_polytope is unbounded")

    def _vertices(self):
        verts = []
        for S in itertools.combinations(range(len(self.normals)), self.dim):
            VS = self.normals[list(S)]
            if abs(np.linalg.det(VS)) < 1e-10:
                continue
            v = np.linalg.solve(VS, self.offsets[list(S)])
            if np.all(self.normals @ v <= self.offsets + self._eps):
                if not any(np.linalg.norm(v - w) < 1e-9 for w in verts):
                    verts.append(v)
        return np.asarray(verts)

    def _nearest(self, X):
        inside = np.all(X @ self.normals.T <= self.offsets + self._eps, axis=1)
        best = np.where(inside, 0.0, np.inf)
        F = X.copy()
        for VS, bS, G in self._faces:
            lam = (X @ VS.T - bS) @ G.T
            Y = X - lam @ VS
            ok = np.all(lam >= -self._eps, axis=1)
            ok &= np.all(Y @ self.normals.T <= self.offsets + self._eps, axis=1)
            d = np.linalg.norm(X - Y, axis=1)
            better = ok & (d < best)
            best[better] = d[better]
            F[better] = Y[better]
        return best, F

    def candidates(self, X):
        d, F = self._nearest(X)
        return d[:, None], F[:, None, :]

    def distance(self, X):
        return self._nearest(X)[0]

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def _on(self, i):
        r = np.abs(self.vertices @ self.normals[i] - self.offsets[i])
        return np.flatnonzero(r <= 1e-9 * (1 + abs(self.offsets[i])))

    def pieces(self):
        n = self.dim
        out = [StratumPiece(0, "point", (tuple(v),), n) for v in self.vertices]
        seen = set()
        if n == 2:
            for i in range(len(self.normals)):
                idx = self._on(i)
                if len(idx) == 2 and tuple(idx) not in seen:
                    seen.add(tuple(idx))
                    p, q = self.vertices[idx]
                    out.append(StratumPiece(1, "segment", (tuple(p), tuple(q)), n))
            return out
        for i, k in itertools.combinations(range(len(self.normals)), 2):
            idx = tuple(np.intersect1d(self._on(i), self._on(k)))
            if len(idx) == 2 and idx not in seen:
                seen.add(idx)
                p, q = self.vertices[list(idx)]
                out.append(StratumPiece(1, "segment", (tuple(p), tuple(q)), n))
        faces_seen = set()
        for i in range(len(self.normals)):
            idx = self._on(i)
            if len(idx) < 3 or tuple(idx) in faces_seen:
                continue
            faces_seen.add(tuple(idx))
            V = self.vertices[idx]
            nv = self.normals[i]
            ctr = V.mean(axis=0)
            e1 = V[0] - ctr
            e1 /= np.linalg.norm(e1)
            e2 = np.cross(nv, e1)
            ang = np.arctan2((V - ctr) @ e2, (V - ctr) @ e1)
            V = V[np.argsort(ang)]
            out.append(StratumPiece(2, "polygon", (tuple(map(tuple, V)), tuple(nv)), n))
        return out

    def to_dict(self):
        return {
            "type": "convex_polytope",
            "halfspaces": [[v.tolist(), float(b)] for v, b in zip(self.normals, self.offsets)],
        }


class AxisBox(ConvexPolytope):
    kind = "axis_box"

    def __init__(self, lo, hi):
        lo = _vec(lo, name="lo")
        hi = _vec(hi, lo.shape[0], name="hi")
        if not np.all(lo < hi):
            raise SceneError("axis_box needs lo < hi componentwise")
        self.lo, self.hi = lo, hi
        n = lo.shape[0]
        hs = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            hs.append([e, hi[i]])
            hs.append([-e, -lo[i]])
        super().__init__(hs)

    def candidates(self, X):
        F = np.clip(X, self.lo, self.hi)
        return np.linalg.norm(X - F, axis=1)[:, None], F[:, None, :]

    def distance(self, X):
        return np.linalg.norm(X - np.clip(X, self.lo, self.hi), axis=1)

    def bounds(self):
        return self.lo.copy(), self.hi.copy()

    def to_dict(self):
        return {"type": "axis_box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


_SHAPE_FIELDS = {
    "point": (Point, ("c",)),
    "point_cloud": (PointCloud, ("points",)),
    "segment": (Segment, ("p", "q")),
    "ball": (Ball, ("c", "R")),
    "axis_box": (AxisBox, ("lo", "hi")),
    "convex_polytope": (ConvexPolytope, ("halfspaces",)),
    "ball_complement": (BallComplement, ("c", "R")),
}


def shape_from_dict(d: dict) -> Shape:
    if not isinstance(d, dict) or "type" not in d:
        raise SceneError(f"shape entry must be an object with a 'type' field: {d!r}")
    if d["type"] not in _SHAPE_FIELDS:
        raise SceneError(f"unknown shape type {d['type']!r}")
    cls, fields = _SHAPE_FIELDS[d["type"]]
    extra = set(d) - set(fields) - {"type"}
    missing = set(fields) - set(d)
    if extra:
        raise SceneError(f"unknown fields for {d['type']}: {sorted(extra)}")
    if missing:
        raise SceneError(f"missing fields for {d['type']}: {sorted(missing)}")
    return cls(*(d[f] for f in fields))


# ---------------------------------------------------------------------------
# scene
# ---------------------------------------------------------------------------


class Scene:
    """Union of primitives in R^2 or R^3 with a padded bounding box."""

    def __init__(self, dim: int, shapes: Sequence[Shape], bbox_margin: float = 2.0):
        if dim not in (2, 3):
            raise SceneError(f"dim must be 2 or 3, got {dim!r}")
        shapes = tuple(shapes)
        if not shapes:
            raise EmptyScene("scene has no shapes")
        for s in shapes:
            if s.dim != dim:
                raise SceneError(f"{s!r} has dimension {s.dim}, scene has {dim}")
        if not (float(bbox_margin) > 0):
            raise SceneError("bbox_margin must be positive")
        self.dim = int(dim)
        self.shapes = shapes
        self.bbox_margin = float(bbox_margin)
        lows, highs = zip(*(s.bounds() for s in shapes))
        self.support_lo = np.min(lows, axis=0)
        self.support_hi = np.max(highs, axis=0)
        self._key = json.dumps(self.to_dict(), sort_keys=True)

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.support_lo - self.bbox_margin, self.support_hi + self.bbox_margin

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.support_hi - self.support_lo))

    def __eq__(self, other):
        return isinstance(other, Scene) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Scene(dim={self.dim}, shapes={list(self.shapes)!r})"

    # -- oracles ---------------------------------------------------------
    def delta_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(len(X))
        for s in range(0, len(X), _CHUNK):
            block = X[s:s + _CHUNK]
            d = self.shapes[0].distance(block)
            for shp in self.shapes[1:]:
                np.minimum(d, shp.distance(block), out=d)
            out[s:s + _CHUNK] = d
        return out

    def _candidates(self, X):
        Ds, Ps = zip(*(s.candidates(X) for s in self.shapes))
        return np.concatenate(Ds, axis=1), np.concatenate(Ps, axis=1)

    def nearest_many(self, X, tol: float = DEFAULT_TOL):
        """Batched nearest points.

        Returns ``(A, unique, delta)``: the closest candidate for every row,
        whether all candidates within ``delta + tol`` coincide to within
        ``tol``, and the distance.  Rows lying in the set return themselves.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A = np.empty_like(X)
        uniq = np.empty(len(X), dtype=bool)
        dist = np.empty(len(X))
        for s in range(0, len(X), _CHUNK):
            block = X[s:s + _CHUNK]
            D, P = self._candidates(block)
            idx = np.argmin(D, axis=1)
            rows = np.arange(len(block))
            d = D[rows, idx]
            a = P[rows, idx]
            close = D <= (d + tol)[:, None]
            spread = np.linalg.norm(P - a[:, None, :], axis=2)
            spread = np.where(close, spread, 0.0).max(axis=1)
            A[s:s + _CHUNK] = a
            uniq[s:s + _CHUNK] = spread <= tol
            dist[s:s + _CHUNK] = d
        return A, uniq, dist

    def nearest_set_at(self, x, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
        x = np.asarray(x, dtype=float)[None, :]
        D, P = self._candidates(x)
        D, P = D[0], P[0]
        d = D.min()
        out: list[np.ndarray] = []
        for i in np.argsort(D, kind="stable"):
            if D[i] > d + tol:
                break
            if all(np.linalg.norm(P[i] - q) > tol for q in out):
                out.append(P[i].copy())
        return out

    def reach_lower_bound(self) -> float:
        """A certified lower bound on reach(A); 0 when none is known."""
        if len(self.shapes) != 1:
            return 0.0
        s = self.shapes[0]
        if isinstance(s, BallComplement):
            return s.R
        if isinstance(s, PointCloud):
            if len(s.points) == 1:
                return math.inf
            diff = s.points[:, None] - s.points[None, :]
            D = np.linalg.norm(diff, axis=2)
            D[np.diag_indices_from(D)] = np.inf
            return 0.5 * float(D.min())
        return math.inf

    def pieces(self) -> list[StratumPiece]:
        return [p for s in self.shapes for p in s.pieces()]

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {"dim": self.dim, "shapes": [s.to_dict() for s in self.shapes],
                "bbox_margin": self.bbox_margin}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        if not isinstance(d, dict):
            raise SceneError("scene must be a JSON object")
        extra = set(d) - {"dim", "shapes", "bbox_margin"}
        if extra:
            raise SceneError(f"unknown scene fields: {sorted(extra)}")
        if "dim" not in d or "shapes" not in d:
            raise SceneError("scene needs 'dim' and 'shapes'")
        if not isinstance(d["shapes"], list):
            raise SceneError("'shapes' must be a list")
        shapes = [shape_from_dict(s) for s in d["shapes"]]
        return cls(d["dim"], shapes, d.get("bbox_margin", 2.0))

    @classmethod
    def loads(cls, text: str) -> "Scene":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SceneError(f"malformed scene JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "Scene":
        return cls.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def delta(scene: Scene, x) -> float:
    """Distance from ``x`` to the scene."""
    return float(scene.delta_many(np.asarray(x, dtype=float)[None, :])[0])


def nearest_set(scene: Scene, x, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """All points of A within ``delta(x) + tol`` of ``x``, deduplicated at ``tol``."""
    if not scene.shapes:
        raise EmptyScene("scene has no shapes")
    return scene.nearest_set_at(x, tol)


def xi(scene: Scene, x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Nearest point projection; raises :class:`NotInDomain` off ``U(A)``."""
    pts = nearest_set(scene, x, tol)
    if len(pts) != 1:
        raise NotInDomain(f"{len(pts)} nearest points at {np.asarray(x).tolist()}")
    return pts[0]
