"""Support measures by three routes, and the coarea identity.

* ``mu_global``: integral of ``H_{n-m-1}`` over the sampled normal bundle.
* ``mu_stratified``: integral over the strata of ``A`` of the normal-fiber
  measure, using exact parametrizations of the primitives' faces.
* ``steiner_fit``: polynomial fit of brute-force parallel-set volumes.
"""

from __future__ import annotations

import math

import numpy as np

from . import oracle
from .bundle import (MeasureEstimate, grouped_jackknife, integrate_bundle, sample_bundle)
from .curvature import curvature_from_frames, finite_cos_product, symmetric_function_many
from .differential import frames_many
from .errors import InvalidIndex, ReachTooSmall, StratumEmpty
from .projection import reach_many
from .strata import classify_bundle, direction_set

FIBER_DIRS = {1: 2, 2: 4096, 3: 4096}
MEMBER_REL = 1e-9
STEINER_RADII = (0.1, 0.2, 0.3, 0.4, 0.5)
# the r^3 coefficient needs a wider lever arm
STEINER_RADII_3D = (0.2, 0.4, 0.6, 0.8, 1.0)


def default_radii(n: int) -> tuple:
    return STEINER_RADII if n == 2 else STEINER_RADII_3D


def alpha(k: int) -> float:
    """Volume of the unit ball in ``R^k``."""
    table = {0: 1.0, 1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}
    if k in table:
        return table[k]
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def _scale(n: int, m: int) -> float:
    return 1.0 / ((n - m) * alpha(n - m))


def _all(a, u):
    return np.ones(len(a), dtype=bool)


def _check_m(n, m, lo=0):
    if not (isinstance(m, (int, np.integer)) and lo <= m <= n - 1):
        raise InvalidIndex(f"m must lie in [{lo}, {n - 1}], got {m!r}")


def mu_global(scene, m: int, selector=None, bundle=None, **bundle_cfg) -> MeasureEstimate:
    """``mu_m(T) = ((n-m) alpha(n-m))^-1 int_T H_{n-m-1} dH^{n-1}`` on the bundle."""
    n = scene.dim
    _check_m(n, m)
    sel = selector or _all
    if bundle is None:
        bundle = sample_bundle(scene, **bundle_cfg)
    c = _scale(n, m)

    def f(a, u, kappa):
        return c * symmetric_function_many(kappa, n - m - 1) * sel(a, u)

    est = integrate_bundle(bundle, f, m=m, method="global")
    est.uncaptured = c * bundle.uncaptured
    return est


def fiber_nodes(basis: np.ndarray, seed: int = 0, n_dirs: int | None = None):
    """Quadrature on the unit sphere of each normal space.

    ``basis`` has shape (K, n, k).  Returns unit vectors (K, D, n) and the
    weight of one node on the ``(k-1)``-sphere (counting measure for k = 1).
    """
    K, n, k = basis.shape
    D = n_dirs or FIBER_DIRS[k]
    if k == 1:
        W = np.array([[1.0], [-1.0]])
        w = 1.0
    else:
        W = direction_set(k, D, seed)
        w = (2 * math.pi if k == 2 else 4 * math.pi) / D
    V = np.einsum("knj,dj->kdn", basis, W)
    return V, w


def fiber_membership(scene, Z: np.ndarray, V: np.ndarray, s: float) -> np.ndarray:
    """``(z, v) in N(A)`` tested by ``delta(z + s v) >= s (1 - MEMBER_REL)``."""
    K, D, n = V.shape
    P = (Z[:, None, :] + s * V).reshape(-1, n)
    d = scene.delta_many(P).reshape(K, D)
    return d >= s * (1.0 - MEMBER_REL)


def _curvatures(scene, z, v, s):
    """Principal curvatures at bundle points ``(z, v)`` from frames at a
    radius below the reach."""
    reach = reach_many(scene, z, v)
    r = np.minimum(0.25 * reach, 10 * s)
    X = z + r[:, None] * v
    fb = frames_many(scene, X)
    return curvature_from_frames(fb).kappa


def _stratum_nodes(scene, j: int, h: float):
    Zs, Ws, Bs = [], [], []
    for p in scene.pieces():
        if p.m != j:
            continue
        Z, W, B = p.sample(h)
        Zs.append(Z)
        Ws.append(W)
        Bs.append(B)
    if not Zs:
        return None
    return np.concatenate(Zs), np.concatenate(Ws), np.concatenate(Bs)


def _stratum_integrand(scene, j, h, s, fn, seed, n_dirs=None):
    """Per-node values ``w_z int_{fiber} fn(z, v) dH^{n-j-1}(v)`` on ``A^(j)``."""
    nodes = _stratum_nodes(scene, j, h)
    if nodes is None:
        return None
    Z, W, B = nodes
    V, wf = fiber_nodes(B, seed, n_dirs)
    member = fiber_membership(scene, Z, V, s)
    K, D, n = V.shape
    vals = np.zeros((K, D))
    rows, cols = np.nonzero(member)
    if len(rows):
        vals[rows, cols] = fn(Z[rows], V[rows, cols])
    return W * wf * vals.sum(axis=1)


def stratum_scale(scene, grid_res: int) -> tuple[float, float]:
    lo, hi = scene.bbox
    h = float((hi - lo).max()) / grid_res
    return h, 1e-3 * scene.diameter


def _stratified_total(scene, m, sel, grid_res, seed, include_higher, n_dirs):
    n = scene.dim
    h, s = stratum_scale(scene, grid_res)
    per_node = []
    for j in range(m, n if include_higher else m + 1):
        if j == m:
            fn = lambda z, v: sel(z, v).astype(float)
        else:
            def fn(z, v, j=j):
                kap = _curvatures(scene, z, v, s)[:, :j]
                return _elementary(kap, j - m) * sel(z, v)
        vals = _stratum_integrand(scene, j, h, s, fn, seed, n_dirs)
        if vals is not None:
            per_node.append(vals)
    if not per_node:
        return None
    return _scale(n, m) * float(np.concatenate(per_node).sum())


def mu_stratified(scene, m: int, selector=None, grid_res: int = 512, seed: int = 0,
                  include_higher: bool = True, n_dirs: int | None = None) -> MeasureEstimate:
    """``mu_m(T)`` from the strata of ``A``.

    The stratum ``A^(m)`` contributes ``int H^{n-m-1}{v : (z, v) in T} dH^m z``.
    With ``include_higher`` the strata ``A^(j)``, ``j > m``, contribute the
    fiber integral of ``e_{j-m}(kappa_1, ..., kappa_j)``; this is zero on flat
    pieces and is what carries ``mu_0`` of a smooth convex body.

    The quadrature is deterministic, so the reported error is the change
    when both the node spacing and the fiber resolution are halved.
    """
    n = scene.dim
    _check_m(n, m)
    sel = selector or _all
    total = _stratified_total(scene, m, sel, grid_res, seed, include_higher, n_dirs)
    if total is None:
        est = MeasureEstimate(m, 0.0, 0.0, "stratified")
        est.meta["empty"] = True
        return est
    k = n - m
    coarse_dirs = (n_dirs or FIBER_DIRS.get(k, 4096)) // 2 if k > 1 else None
    coarse = _stratified_total(scene, m, sel, max(grid_res // 2, 8), seed, include_higher, coarse_dirs)
    return MeasureEstimate(m, total, abs(total - coarse), "stratified")


def _elementary(kappa: np.ndarray, k: int) -> np.ndarray:
    """Elementary symmetric polynomial of degree ``k`` in the rows of ``kappa``."""
    N, j = kappa.shape
    e = np.zeros((N, k + 1))
    e[:, 0] = 1.0
    for i in range(j):
        for d in range(min(i + 1, k), 0, -1):
            e[:, d] = e[:, d] + kappa[:, i] * e[:, d - 1]
    return e[:, k]


def strict_stratum_measure(scene, m: int, selector=None, grid_res: int = 512,
                           seed: int = 0) -> MeasureEstimate:
    """Only the ``A^(m)`` term; raises :class:`StratumEmpty` if there is none."""
    est = mu_stratified(scene, m, selector, grid_res, seed, include_higher=False)
    if est.meta.get("empty"):
        raise StratumEmpty(f"stratum {m} is empty")
    return est


def _steiner_coefficients(d: dict, radii: np.ndarray, grid_res: int, n: int):
    V0 = oracle.parallel_volume(d, 0.0, grid_res)
    y = np.array([oracle.parallel_volume(d, float(r), grid_res) for r in radii]) - V0
    X = np.stack([radii ** (n - m) * alpha(n - m) for m in range(n)], axis=1)
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    dof = len(radii) - n
    if dof > 0:
        resid = y - X @ coef
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.inv(X.T @ X)
        err = np.sqrt(np.maximum(np.diag(cov), 0.0))
    else:
        err = np.zeros(n)
    return coef, err, V0


def steiner_fit(scene, radii=None, grid_res: int = 1024) -> list[MeasureEstimate]:
    """Support measures from ``V(r) - V(0) = sum_m r^{n-m} alpha(n-m) mu_m``.

    ``V(0)`` is measured on the same grid and held fixed; the ``n``
    coefficients are fitted by least squares.  The error combines the fit
    residual with the change of the coefficients on a grid of half the
    resolution, which captures the volume oracle's own discretization bias.
    """
    n = scene.dim
    radii = np.asarray(sorted(default_radii(n) if radii is None else radii), dtype=float)
    if len(radii) < n + 1:
        raise ValueError(f"need at least {n + 1} radii")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    reach = scene.reach_lower_bound()
    if not radii.max() < reach:
        raise ReachTooSmall(f"largest radius {radii.max()} is not below the reach bound {reach}")
    d = scene.to_dict()
    coef, fit_err, V0 = _steiner_coefficients(d, radii, grid_res, n)
    coarse, _, _ = _steiner_coefficients(d, radii, max(grid_res // 2, 8), n)
    err = np.hypot(fit_err, coef - coarse)
    return [MeasureEstimate(m, float(coef[m]), float(err[m]), "steiner",
                            meta={"V0": V0, "radii": radii.tolist(), "fit_stderr": float(fit_err[m])})
            for m in range(n)]


def coarea_check(scene, m: int, f=None, grid_res: int = 512, bundle=None, seed: int = 0,
                 **bundle_cfg) -> dict:
    """Both sides of the coarea identity on the ``m``-th stratum.

    LHS: ``int_{N(A)|A^(m)} f prod_{i<=m} (1 + kappa_i^2)^{-1/2} dH^{n-1}``
    (finite curvatures only).  RHS: ``int_{A^(m)} int_{N(A, z)} f``.
    """
    n = scene.dim
    _check_m(n, m)
    f = f or (lambda a, u: np.ones(len(a)))
    if bundle is None:
        bundle = sample_bundle(scene, grid_res=grid_res, **bundle_cfg)
    if np.any(bundle.stratum < 0):
        bundle = classify_bundle(bundle, scene, seed=seed)
    sub = bundle.subset(bundle.stratum == m)
    lhs = integrate_bundle(sub, lambda a, u, k: f(a, u) * finite_cos_product(k, m), m=m,
                           method="coarea_lhs")
    h, s = stratum_scale(scene, grid_res)
    vals = _stratum_integrand(scene, m, h, s, lambda z, v: np.asarray(f(z, v), float), seed)
    rhs_v, rhs_e = grouped_jackknife(vals) if vals is not None else (0.0, 0.0)
    denom = abs(rhs_v) if rhs_v != 0 else max(abs(lhs.value), 1e-300)
    gap = abs(lhs.value - rhs_v) / denom if (lhs.value or rhs_v) else 0.0
    return {"m": m, "lhs": lhs.value, "lhs_stderr": lhs.stderr, "rhs": rhs_v, "rhs_stderr": rhs_e,
            "gap": gap}


def infinite_curvature_census(bundle, selector=None, m: int = 1, j: int | None = None,
                              scene=None, seed: int = 0) -> float:
    """Weight fraction of bundle points over ``S`` (and stratum ``j``) whose
    ``m``-th principal curvature is infinite."""
    if m < 1 or m > bundle.dim - 1:
        raise InvalidIndex(f"m must lie in [1, {bundle.dim - 1}]")
    if j is not None and np.any(bundle.stratum < 0):
        if scene is None:
            raise ValueError("stratum filter needs a classified bundle or a scene")
        bundle = classify_bundle(bundle, scene, seed=seed)
    mask = np.ones(len(bundle), dtype=bool)
    if selector is not None:
        mask &= np.asarray(selector(bundle.a, bundle.u), dtype=bool)
    if j is not None:
        mask &= bundle.stratum == j
    w = bundle.weight[mask]
    if w.sum() == 0:
        return float("nan")
    inf = np.isinf(bundle.kappa[mask, m - 1])
    return float(w[inf].sum() / w.sum())


def three_way(scene, m: int, grid_res: int = 512, steiner_grid: int = 1024,
              radii=None, seed: int = 0) -> dict:
    """The three estimates of ``mu_m`` for a positive-reach scene."""
    g = mu_global(scene, m, grid_res=grid_res)
    s = mu_stratified(scene, m, grid_res=grid_res, seed=seed)
    st = steiner_fit(scene, radii, steiner_grid)[m]
    return {"global": g, "stratified": s, "steiner": st}


__all__ = [
    "alpha", "default_radii", "mu_global", "mu_stratified", "strict_stratum_measure", "steiner_fit", "coarea_check",
    "infinite_curvature_census", "three_way", "fiber_nodes", "fiber_membership", "MeasureEstimate",
]
