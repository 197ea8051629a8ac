"""Quadrature on the generalized unit normal bundle.

The bundle is reached through level sets of the distance function: every
regular point ``x`` of ``S(A, r)`` maps to ``psi(x) = (xi(x), nu(x))`` and the
facet area of ``x`` is pushed forward with the Jacobian

    J = prod_i sqrt((1 - r chi_i)^2 + chi_i^2).

Sets without a uniform reach bound are sampled on dyadic shells
``r_k = r0 2^-k``; level ``r_k`` contributes only points whose reach lies in
``(r_k, r_{k-1}]`` so that no part of the bundle is counted twice.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from skimage import measure as skmeasure

from ._parallel import chunked_map
from .curvature import curvature_from_frames
from .differential import DIFF_TOL, STEP_FACTOR, regular_many
from .errors import EmptyLevelSet
from .projection import psi_many

INF = math.inf
MAX_CELLS = 10**9
N_SHELLS = 4
SHELL_OVERLAP = 1.5
JACKKNIFE_GROUPS = 16


@dataclass
class LevelSet:
    r: float
    grid_res: int
    h: float
    vertices: np.ndarray
    facets: np.ndarray
    centroids: np.ndarray
    areas: np.ndarray

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def samples(self):
        """``(point, patch_area)`` pairs."""
        return list(zip(self.centroids, self.areas))


GRID_SHIFT = np.array([0.3819660112501051, 0.2360679774997897, 0.1458980337503155])


def _grid(scene, grid_res: int):
    lo, hi = scene.bbox
    side = hi - lo
    h = float(side.max()) / grid_res
    # irrational shift so grid lines never align with flat pieces of A
    lo = lo - h * GRID_SHIFT[:len(lo)]
    counts = np.ceil(side / h - 1e-9).astype(int) + 2
    if np.prod(counts.astype(float)) > MAX_CELLS:
        raise ValueError("grid exceeds the cell budget")
    axes = [lo[i] + h * np.arange(counts[i]) for i in range(len(lo))]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    parts = chunked_map(lambda s, e: scene.delta_many(G[s:e]), len(G), 1 << 16)
    return lo, h, np.concatenate(parts).reshape(tuple(counts))


def snap_to_level(scene, X, r: float):
    """Move each row of ``X`` to ``xi(x) + r nu(x)``; rows without a unique
    nearest point are left in place."""
    A, U, D, ok = psi_many(scene, X)
    Y = X.copy()
    Y[ok] = A[ok] + r * U[ok]
    return Y


def _facet_measure(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Length (segments) or area (triangles) and centroid of each facet."""
    if P.shape[1] == 2:
        size = np.linalg.norm(P[:, 1] - P[:, 0], axis=1)
    else:
        size = 0.5 * np.linalg.norm(np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]), axis=1)
    return size, P.mean(axis=1)


def sample_level_set(scene, r: float, grid_res: int = 512, snap: bool = True) -> LevelSet:
    """Polygonal approximation of ``S(A, r) = {x : delta(x) = r}``.

    Marching squares (2-d) or marching cubes (3-d) on the exact distance grid,
    with every vertex moved radially onto the level set.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    lo, h, F = _grid(scene, grid_res)
    if not (F.min() < r < F.max()):
        raise EmptyLevelSet(f"no crossing of level {r} on the grid")
    n = F.ndim
    if n == 2:
        verts, facets = [], []
        offset = 0
        for c in skmeasure.find_contours(F, r):
            k = len(c)
            if k < 2:
                continue
            verts.append(c)
            idx = np.arange(offset, offset + k)
            facets.append(np.stack([idx[:-1], idx[1:]], axis=1))
            offset += k
        if not verts:
            raise EmptyLevelSet(f"no crossing of level {r} on the grid")
        V = lo + h * np.concatenate(verts)
        Fc = np.concatenate(facets)
    else:
        V, Fc, _, _ = skmeasure.marching_cubes(F, level=r, spacing=(h,) * 3)
        V = lo + V
    if snap:
        V = snap_to_level(scene, V, r)
    size, cent = _facet_measure(V[Fc])
    keep = size > 0
    Fc, size, cent = Fc[keep], size[keep], cent[keep]
    if snap:
        cent = snap_to_level(scene, cent, r)
    return LevelSet(r=float(r), grid_res=int(grid_res), h=h, vertices=V, facets=Fc,
                    centroids=cent, areas=size)


@dataclass
class BundlePoint:
    a: np.ndarray
    u: np.ndarray
    reach: float
    r_src: float
    weight: float
    chi: np.ndarray
    kappa: np.ndarray
    stratum: int | None = None


@dataclass
class Bundle:
    """Struct-of-arrays sample of ``N(A)``.

    ``stratum`` is -1 where unset.  ``q_margin`` holds
    ``min_{|tau|=1} Q(tau, tau) + 1/reach`` (``inf`` when ``T_A`` is trivial).
    """

    dim: int
    a: np.ndarray
    u: np.ndarray
    reach: np.ndarray
    r_src: np.ndarray
    weight: np.ndarray
    chi: np.ndarray
    kappa: np.ndarray
    m_T: np.ndarray
    q_margin: np.ndarray
    q_asymmetry: np.ndarray
    sym_residual: np.ndarray
    stratum: np.ndarray
    dropped_area: float = 0.0
    level_area: float = 0.0
    uncaptured: float = 0.0
    meta: dict = field(default_factory=dict)

    _ARRAYS = ("a", "u", "reach", "r_src", "weight", "chi", "kappa", "m_T", "q_margin",
               "q_asymmetry", "sym_residual", "stratum")

    def __len__(self):
        return len(self.weight)

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    def point(self, i: int) -> BundlePoint:
        s = int(self.stratum[i])
        return BundlePoint(self.a[i], self.u[i], float(self.reach[i]), float(self.r_src[i]),
                           float(self.weight[i]), self.chi[i], self.kappa[i], None if s < 0 else s)

    def points(self):
        return [self.point(i) for i in range(len(self))]

    def subset(self, mask) -> "Bundle":
        kw = {k: getattr(self, k)[mask] for k in self._ARRAYS}
        return Bundle(dim=self.dim, dropped_area=self.dropped_area, level_area=self.level_area,
                      uncaptured=self.uncaptured, meta=dict(self.meta), **kw)

    @classmethod
    def concat(cls, parts: list["Bundle"], dim: int) -> "Bundle":
        if not parts:
            return cls.empty(dim)
        kw = {k: np.concatenate([getattr(p, k) for p in parts]) for k in cls._ARRAYS}
        return cls(dim=dim, dropped_area=sum(p.dropped_area for p in parts),
                   level_area=sum(p.level_area for p in parts), **kw)

    @classmethod
    def empty(cls, dim: int) -> "Bundle":
        k = dim - 1
        z = np.zeros(0)
        return cls(dim=dim, a=np.zeros((0, dim)), u=np.zeros((0, dim)), reach=z, r_src=z, weight=z,
                   chi=np.zeros((0, k)), kappa=np.zeros((0, k)), m_T=np.zeros(0, dtype=int),
                   q_margin=z, q_asymmetry=z, sym_residual=z, stratum=np.zeros(0, dtype=int))


def _lift_points(scene, X, area, r, step_factor, tol, sym_tol, kink_tol):
    """Regular subset of ``X`` as a :class:`Bundle` plus the mask of regular rows."""

    def work(s, e):
        return regular_many(scene, X[s:e], tol=tol, step_factor=step_factor,
                            sym_tol=sym_tol, kink_tol=kink_tol)

    parts = chunked_map(work, len(X), 2048)
    mask = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, dtype=bool)
    fbs = [p[1].subset(p[0]) for p in parts]
    if not mask.any():
        return Bundle.empty(X.shape[1]), mask
    fields = fbs[0].__dataclass_fields__
    fb = type(fbs[0])(**{k: np.concatenate([getattr(f, k) for f in fbs]) for k in fields})
    cb = curvature_from_frames(fb)
    chi = fb.chi
    J = np.prod(np.sqrt((1.0 - r * chi) ** 2 + chi ** 2), axis=1)
    reach = np.where(np.isinf(fb.rho), INF, fb.rho * fb.delta)
    k = X.shape[1] - 1
    qmin = np.full(len(fb), INF)
    for mm in range(1, k + 1):
        rows = cb.m == mm
        if rows.any():
            qmin[rows] = np.linalg.eigvalsh(cb.Q[rows, :mm, :mm])[:, 0]
    inv_reach = np.where(np.isinf(reach), 0.0, 1.0 / np.where(np.isinf(reach), 1.0, reach))
    qmargin = np.where(np.isinf(qmin), INF, qmin + inv_reach)
    b = Bundle(dim=X.shape[1], a=fb.a, u=fb.u, reach=reach, r_src=np.full(len(fb), float(r)),
               weight=area[mask] * J, chi=chi, kappa=cb.kappa, m_T=cb.m, q_margin=qmargin,
               q_asymmetry=cb.q_asymmetry, sym_residual=fb.sym_residual,
               stratum=np.full(len(fb), -1, dtype=int))
    return b, mask


def subdivide_facets(P: np.ndarray, k: int) -> np.ndarray:
    """Split each facet of ``P`` (F, n_vertices, n) into congruent pieces:
    ``k`` sub-segments or ``k^2`` sub-triangles."""
    F, nv, n = P.shape
    if nv == 2:
        t = np.arange(k + 1) / k
        Q = P[:, :1] + t[None, :, None] * (P[:, 1:2] - P[:, :1])
        return np.stack([Q[:, :-1], Q[:, 1:]], axis=2).reshape(F * k, 2, n)
    tris = []
    for i in range(k):
        for j in range(k - i):
            tris.append([(i, j), (i + 1, j), (i, j + 1)])
            if i + j < k - 1:
                tris.append([(i + 1, j), (i + 1, j + 1), (i, j + 1)])
    B = np.asarray(tris, dtype=float) / k
    e1 = P[:, 1] - P[:, 0]
    e2 = P[:, 2] - P[:, 0]
    Q = (P[:, None, None, 0] + B[None, :, :, :1] * e1[:, None, None]
         + B[None, :, :, 1:] * e2[:, None, None])
    return Q.reshape(F * len(tris), 3, n)


REFINE_TOL = 0.02


def lift_to_bundle(scene, level: LevelSet, step_factor: float = STEP_FACTOR, tol: float = DIFF_TOL,
                   sym_tol: float = 1e-2, kink_tol: float = 1e-2, refine: int | None = None) -> Bundle:
    """Push the facets of a level set forward to ``N(A)``.

    A facet is refined once when its centroid is not regular, or when the
    area ratio of its image under ``xi`` disagrees with ``prod(1 - r chi_i)``
    at the centroid by more than ``REFINE_TOL`` (the facet straddles a change
    of the nearest-point structure).  Sub-facets whose centroid is still not
    regular are dropped and their area is reported in ``dropped_area``.
    """
    r = level.r
    n = level.vertices.shape[1]
    if refine is None:
        refine = 16 if n == 2 else 4
    b, mask = _lift_points(scene, level.centroids, level.areas, r, step_factor, tol, sym_tol, kink_tol)
    A, _, _, _ = psi_many(scene, level.vertices)
    img, _ = _facet_measure(A[level.facets])
    ratio = img / level.areas
    det = np.full(len(level.areas), np.nan)
    det[mask] = np.prod(1.0 - r * b.chi, axis=1)
    bad = ~mask | (np.abs(ratio - det) > REFINE_TOL)
    good = b.subset(~bad[mask])
    parts = [good]
    dropped = 0.0
    if bad.any():
        P = subdivide_facets(level.vertices[level.facets[bad]], refine)
        P = snap_to_level(scene, P.reshape(-1, n), r).reshape(P.shape)
        size, cent = _facet_measure(P)
        cent = snap_to_level(scene, cent, r)
        sb, smask = _lift_points(scene, cent, size, r, step_factor, tol, sym_tol, kink_tol)
        parts.append(sb)
        dropped = float(size[~smask].sum())
    out = Bundle.concat(parts, n)
    out.dropped_area = dropped
    out.level_area = level.total_area
    return out


def default_r0(scene) -> float:
    lo, hi = scene.bbox
    margin = float(scene.bbox_margin) if hasattr(scene, "bbox_margin") else 1.0
    return min(0.5, 0.5 * margin)


def shell_radii(scene, r0: float | None = None, n_shells: int = N_SHELLS) -> list[float]:
    """Single level when the reach bound allows it, else dyadic shells."""
    r0 = default_r0(scene) if r0 is None else float(r0)
    rb = scene.reach_lower_bound() if hasattr(scene, "reach_lower_bound") else 0.0
    if rb >= 2 * r0:
        return [r0]
    if rb > 0:
        return [min(r0, 0.5 * rb)]
    return [r0 * 2.0 ** -k for k in range(n_shells + 1)]


_CACHE: dict = {}
_CACHE_MAX = 32


def sample_bundle(scene, r: float | None = None, grid_res: int = 512, n_shells: int = N_SHELLS,
                  step_factor: float = STEP_FACTOR, tol: float = DIFF_TOL, use_cache: bool = True,
                  radii: list[float] | None = None) -> Bundle:
    """Sample ``N(A)`` over one level or a dyadic shell schedule.

    With several levels, level ``r_k`` keeps the points whose reach lies in
    ``(c r_k, c r_{k-1}]`` with ``c = SHELL_OVERLAP``, so every kept point sits
    well inside its own reach (``rho >= c``), away from the medial set where
    the regularity test fails.  ``uncaptured`` is the weight of the innermost
    shell, a proxy for the part of the bundle whose reach is below the last
    level.
    """
    radii = list(radii) if radii is not None else shell_radii(scene, r, n_shells)
    key = (scene, tuple(radii), int(grid_res), float(step_factor), float(tol))
    if use_cache and key in _CACHE:
        return _CACHE[key]
    parts = []
    K = len(radii)
    for k, rk in enumerate(radii):
        lvl = sample_level_set(scene, rk, grid_res)
        b = lift_to_bundle(scene, lvl, step_factor, tol)
        if K > 1:
            # level r_k owns reach in (c r_k, c r_{k-1}]; the last level has no lower cut
            lo = SHELL_OVERLAP * rk if k < K - 1 else 0.0
            hi = SHELL_OVERLAP * radii[k - 1] if k > 0 else math.inf
            sub = b.subset((b.reach > lo) & (b.reach <= hi))
            sub.dropped_area, sub.level_area = b.dropped_area, b.level_area
            b = sub
        parts.append(b)
    out = Bundle.concat(parts, scene.dim)
    out.uncaptured = parts[-1].total_weight if len(radii) > 1 else 0.0
    out.meta = {"radii": radii, "grid_res": int(grid_res)}
    if use_cache:
        if len(_CACHE) >= _CACHE_MAX:
            _CACHE.pop(next(iter(_CACHE)))
        _CACHE[key] = out
    return out


@dataclass
class MeasureEstimate:
    m: int
    value: float
    stderr: float
    method: str
    uncaptured: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"m": self.m, "method": self.method, "value": self.value, "stderr": self.stderr,
                "uncaptured": self.uncaptured}


def grouped_jackknife(values: np.ndarray, groups: int = JACKKNIFE_GROUPS) -> tuple[float, float]:
    """Total of ``values`` and its delete-a-group jackknife standard error.

    Items are stored in spatial order and dealt round-robin into ``groups``
    groups, so every group spans the whole sample.
    """
    values = np.asarray(values, dtype=float)
    total = float(values.sum())
    K = min(groups, len(values))
    if K < 2:
        return total, 0.0
    idx = np.arange(len(values)) % K
    b = np.bincount(idx, weights=values, minlength=K)
    err = math.sqrt(K / (K - 1) * float(((b - b.mean()) ** 2).sum()))
    return total, err


def integrate_bundle(bundle: Bundle, f, m: int = -1, method: str = "bundle") -> MeasureEstimate:
    """``sum_i f(a_i, u_i, kappa_i) w_i`` with a jackknife error.

    ``f`` is vectorized: it receives arrays of shape (N, n), (N, n) and
    (N, n-1) and returns (N,) values.
    """
    if len(bundle) == 0:
        return MeasureEstimate(m, 0.0, 0.0, method, bundle.uncaptured)
    vals = np.asarray(f(bundle.a, bundle.u, bundle.kappa), dtype=float) * bundle.weight
    total, err = grouped_jackknife(vals)
    return MeasureEstimate(m, total, err, method, bundle.uncaptured)


def _fmt(v) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def bundle_csv(bundle: Bundle) -> str:
    n = bundle.dim
    ax = "xyz"[:n]
    cols = [f"a_{c}" for c in ax] + [f"u_{c}" for c in ax] + ["reach", "r_src", "weight"]
    cols += [f"chi_{i + 1}" for i in range(n - 1)] + ["stratum"]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for i in range(len(bundle)):
        row = [_fmt(v) for v in bundle.a[i]] + [_fmt(v) for v in bundle.u[i]]
        row += [_fmt(bundle.reach[i]), _fmt(bundle.r_src[i]), _fmt(bundle.weight[i])]
        row += [_fmt(v) for v in bundle.chi[i]]
        s = int(bundle.stratum[i])
        row.append("" if s < 0 else str(s))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_bundle_csv(bundle: Bundle, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(bundle_csv(bundle))


__all__ = [
    "LevelSet", "BundlePoint", "Bundle", "MeasureEstimate", "sample_level_set", "snap_to_level",
    "lift_to_bundle", "subdivide_facets", "sample_bundle", "shell_radii", "integrate_bundle", "grouped_jackknife",
    "bundle_csv", "write_bundle_csv",
]
