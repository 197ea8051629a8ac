"""Nearest point projection, spherical image map and reach-type functions.

Infinite reach and infinite ``rho`` are reported as ``math.inf``; every
consumer compares against it explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NotInDomain, NotOnSet
from .scene import DEFAULT_TOL, Scene

INF = math.inf
T_MAX = 1e6
BISECT_TOL = 1e-9
MAX_BISECT = 64
# reach values below this are indistinguishable from tangency
REACH_FLOOR = 1e-6


class DilationWarning(UserWarning):
    """Raised when a dilation factor is at or beyond rho(A, x)."""


@dataclass
class ProjectedPoint:
    x: np.ndarray
    a: np.ndarray
    u: np.ndarray
    delta: float
    rho: float | None = None


def psi_many(scene: Scene, X, tol: float = DEFAULT_TOL):
    """Batched ``(xi, nu, delta)``; ``ok`` is False off ``U(A)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A, uniq, D = scene.nearest_many(X, tol)
    ok = uniq & (D > tol)
    U = np.zeros_like(X)
    U[ok] = (X[ok] - A[ok]) / D[ok, None]
    return A, U, D, ok


def psi(scene: Scene, x, tol: float = DEFAULT_TOL) -> ProjectedPoint:
    x = np.asarray(x, dtype=float)
    A, U, D, ok = psi_many(scene, x[None, :], tol)
    if not ok[0]:
        if D[0] <= tol:
            raise NotInDomain(f"{x.tolist()} lies in A")
        raise NotInDomain(f"nearest point of {x.tolist()} is not unique")
    return ProjectedPoint(x, A[0], U[0], float(D[0]))


def _bisect(pred, lo, hi, rel_tol):
    """Largest value where a monotone (true-then-false) predicate holds.

    ``pred`` maps an array of trial values to a boolean array; ``lo`` must
    satisfy it and ``hi`` must not.
    """
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    for _ in range(MAX_BISECT):
        active = (hi - lo) > rel_tol * np.maximum(lo, 1.0)
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        res = np.ones(len(lo), dtype=bool)
        res[active] = pred(mid[active], active)
        lo = np.where(active & res, mid, lo)
        hi = np.where(active & ~res, mid, hi)
    return lo


def rho_from_psi(scene: Scene, A, U, D, t_max: float = T_MAX, tol: float = BISECT_TOL):
    """``rho(A, x)`` for rows already projected to ``(a, u, delta)``."""
    A = np.atleast_2d(A)
    U = np.atleast_2d(U)
    D = np.atleast_1d(np.asarray(D, dtype=float))

    def holds(t, rows):
        td = t * D[rows]
        dist = scene.delta_many(A[rows] + td[:, None] * U[rows])
        return dist >= td - tol * D[rows] * np.maximum(t, 1.0)

    out = np.full(len(D), INF)
    all_rows = np.ones(len(D), dtype=bool)
    capped = holds(np.full(len(D), t_max), all_rows)
    fin = ~capped
    if fin.any():
        idx = np.flatnonzero(fin)

        def sub(t, rows):
            return holds(t, _expand(idx, rows, len(D)))

        out[fin] = _bisect(sub, np.ones(len(idx)), np.full(len(idx), t_max), tol)
    return out


def _expand(idx, rows, n):
    mask = np.zeros(n, dtype=bool)
    mask[idx[rows]] = True
    return mask


def rho_many(scene: Scene, X, t_max: float = T_MAX, tol: float = BISECT_TOL,
             proj_tol: float = DEFAULT_TOL):
    """Batched ``rho(A, x)``; NaN where ``x`` is outside ``U(A)``."""
    A, U, D, ok = psi_many(scene, X, proj_tol)
    out = np.full(len(D), np.nan)
    if ok.any():
        out[ok] = rho_from_psi(scene, A[ok], U[ok], D[ok], t_max, tol)
    return out


def rho(scene: Scene, x, t_max: float = T_MAX, tol: float = BISECT_TOL) -> float:
    """``sup{t : delta(xi(x) + t (x - xi(x))) = t delta(x)}``, by bisection."""
    p = psi(scene, x)
    return float(rho_from_psi(scene, p.a[None], p.u[None], np.array([p.delta]), t_max, tol)[0])


def reach_many(scene: Scene, A, U, s_max: float = T_MAX, tol: float = BISECT_TOL,
               on_set_tol: float = 1e-7):
    """Batched reach function ``sup{s : delta(a + s u) = s}``.

    Returns 0 where ``(a, u)`` is not in the normal bundle.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if np.any(scene.delta_many(A) > on_set_tol):
        raise NotOnSet("base point is not in A")

    def holds(s, rows):
        dist = scene.delta_many(A[rows] + s[:, None] * U[rows])
        return dist >= s - tol * np.maximum(s, 1.0)

    n = len(A)
    out = np.full(n, INF)
    capped = holds(np.full(n, s_max), np.ones(n, dtype=bool))
    fin = ~capped
    if fin.any():
        idx = np.flatnonzero(fin)

        def sub(s, rows):
            return holds(s, _expand(idx, rows, n))

        # relative stopping rule on [0, s_max] with an absolute floor
        res = _bisect(sub, np.zeros(len(idx)), np.full(len(idx), s_max), tol)
        res[res < REACH_FLOOR] = 0.0
        out[fin] = res
    return out


def reach_function(scene: Scene, a, u, s_max: float = T_MAX, tol: float = BISECT_TOL) -> float:
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(reach_many(scene, a[None], u[None], s_max, tol)[0])


def dilate(scene: Scene, x, t: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``h_t(x) = xi(x) + t (x - xi(x))``; warns when ``t >= rho(A, x)``."""
    if not t > 0:
        raise ValueError("dilation factor must be positive")
    p = psi(scene, x, tol)
    if t >= rho(scene, x):
        warnings.warn(f"t={t} is not below rho(A, x)", DilationWarning, stacklevel=2)
    return p.a + t * (p.x - p.a)


def is_regular(scene: Scene, x, tol: float = 1e-6, **kw):
    """Numerical regularity test; returns ``(flag, ProjectedPoint | None)``.

    See :func:`curvmeas.differential.regular_many` for the criteria.
    """
    from .differential import regular_many

    x = np.asarray(x, dtype=float)
    try:
        mask, fb = regular_many(scene, x[None], tol=tol, **kw)
    except Exception:  # any oracle failure means "not regular"
        return False, None
    if not fb.ok[0]:
        return bool(mask[0]), None
    pp = ProjectedPoint(x, fb.a[0], fb.u[0], float(fb.delta[0]), float(fb.rho[0]))
    return bool(mask[0]), pp
