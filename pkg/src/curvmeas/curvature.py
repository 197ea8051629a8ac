"""Principal curvatures, second fundamental form and symmetric functions.

Infinite curvatures are carried as ``math.inf``.  The symmetric functions use
the limit convention ``(1 + k^2)^(-1/2) -> 0`` and ``k (1 + k^2)^(-1/2) -> 1``
as ``k -> inf``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .differential import DIFF_TOL, STEP_FACTOR, FrameBatch, regular_many
from .errors import InvalidIndex, NotInBundle, NotOnManifold, NotRegular
from .projection import reach_function

INF = math.inf
SING_TOL = 1e-5
RANK_REL = 1e-3
RANK_FLOOR = 1e-8


def kappa_from_chi(chi, r: float, sing_tol: float = SING_TOL):
    """``chi / (1 - r chi)``, infinite where ``|1 - r chi| <= sing_tol``."""
    if not r > 0:
        raise ValueError("r must be positive")
    chi = np.asarray(chi, dtype=float)
    den = 1.0 - r * chi
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(np.abs(den) <= sing_tol, INF, chi / np.where(den == 0, 1.0, den))
    return float(k) if k.ndim == 0 else k


@dataclass
class CurvatureData:
    a: np.ndarray
    u: np.ndarray
    r_eval: float
    kappa: np.ndarray
    T_basis: np.ndarray
    Q: np.ndarray
    m: int
    reach: float = INF
    q_asymmetry: float = 0.0
    sym_residual: float = 0.0
    chi: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def q_lower_margin(self) -> float:
        """``min_{|tau|=1} Q(tau, tau) + 1/reach`` (``inf`` if ``m == 0``)."""
        if self.m == 0:
            return INF
        lo = float(np.linalg.eigvalsh(self.Q)[0])
        return lo + (0.0 if self.reach == INF else 1.0 / self.reach)

    def to_dict(self) -> dict:
        return {
            "a": self.a.tolist(),
            "u": self.u.tolist(),
            "r_eval": self.r_eval,
            "m": self.m,
            "kappa": [("inf" if k == INF else float(k)) for k in self.kappa],
            "Q": self.Q.tolist(),
            "reach": "inf" if self.reach == INF else self.reach,
        }


@dataclass
class CurvatureBatch:
    """Per-row curvature data for a :class:`FrameBatch`."""

    kappa: np.ndarray      # (N, n-1), ascending, inf padded
    m: np.ndarray          # (N,)
    T: np.ndarray          # (N, n, n-1), first m columns span T_A
    Q: np.ndarray          # (N, n-1, n-1), top-left m x m block is Q_A
    q_asymmetry: np.ndarray


def curvature_from_frames(fb: FrameBatch, rank_rel: float = RANK_REL,
                          rank_floor: float = RANK_FLOOR) -> CurvatureBatch:
    """Second fundamental form from the differentials of each row.

    ``T_A = im D xi`` is read off the SVD ``D xi = U S V^T``; with
    ``tau_j = U_j`` and ``v_j = V_j / s_j`` we have ``D xi v_j = tau_j`` and
    ``Q_ij = tau_i . D nu(v_j)``.
    """
    N, n, _ = fb.Dxi.shape
    k = n - 1
    Uu, s, Vt = np.linalg.svd(fb.Dxi)
    thresh = np.maximum(rank_rel * s[:, :1], rank_floor)
    keep = s[:, :k] >= thresh
    # directions along u carry no rank; cap at n-1
    m = keep.sum(axis=1)
    inv = np.where(keep, 1.0 / np.where(keep, s[:, :k], 1.0), 0.0)
    Ut = Uu[:, :, :k]
    Vk = np.transpose(Vt, (0, 2, 1))[:, :, :k]
    Qf = np.transpose(Ut, (0, 2, 1)) @ fb.Dnu @ (Vk * inv[:, None, :])
    mask2 = keep[:, :, None] & keep[:, None, :]
    Qf = np.where(mask2, Qf, 0.0)
    asym = np.linalg.norm(Qf - np.transpose(Qf, (0, 2, 1)), axis=(1, 2))
    Qs = 0.5 * (Qf + np.transpose(Qf, (0, 2, 1)))
    kappa = np.full((N, k), INF)
    for mm in range(1, k + 1):
        rows = m == mm
        if rows.any():
            kappa[rows, :mm] = np.linalg.eigvalsh(Qs[rows, :mm, :mm])
    return CurvatureBatch(kappa=kappa, m=m, T=Ut, Q=Qs, q_asymmetry=asym)


def curvature_at(scene, a, u, r_eval: float, step_factor: float = STEP_FACTOR,
                 tol: float = DIFF_TOL, rank_rel: float = RANK_REL,
                 reach: float | None = None) -> CurvatureData:
    """Curvature data of ``A`` at ``(a, u)`` evaluated at ``x = a + r_eval u``."""
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    if not r_eval > 0:
        raise ValueError("r_eval must be positive")
    if reach is None:
        reach = reach_function(scene, a, u)
    if not reach > r_eval:
        raise NotInBundle(f"reach {reach} at (a, u) does not exceed r = {r_eval}")
    x = a + r_eval * u
    mask, fb = regular_many(scene, x[None], tol=tol, step_factor=step_factor,
                            rho=np.array([reach / r_eval]))
    if not mask[0]:
        raise NotRegular(f"{x.tolist()} fails the regularity test")
    cb = curvature_from_frames(fb, rank_rel)
    m = int(cb.m[0])
    return CurvatureData(
        a=a, u=u, r_eval=float(r_eval), kappa=cb.kappa[0], T_basis=cb.T[0][:, :m],
        Q=cb.Q[0][:m, :m], m=m, reach=float(reach), q_asymmetry=float(cb.q_asymmetry[0]),
        sym_residual=float(fb.sym_residual[0]), chi=fb.chi[0],
    )


@dataclass(frozen=True)
class SymmetricFunctionValue:
    j: int
    value: float


def _cs(kappa: np.ndarray):
    finite = np.isfinite(kappa)
    kf = np.where(finite, kappa, 0.0)
    c = np.where(finite, 1.0 / np.sqrt(1.0 + kf * kf), 0.0)
    s = np.where(finite, kf * c, 1.0)
    return c, s


def symmetric_function_many(kappa, j: int) -> np.ndarray:
    """``H_j`` for each row of ``kappa`` (shape (N, n-1))."""
    kappa = np.atleast_2d(np.asarray(kappa, dtype=float))
    k = kappa.shape[1]
    if not (isinstance(j, (int, np.integer)) and 0 <= j <= k):
        raise InvalidIndex(f"j must lie in [0, {k}], got {j!r}")
    c, s = _cs(kappa)
    out = np.zeros(len(kappa))
    for L in itertools.combinations(range(k), j):
        term = np.ones(len(kappa))
        for i in range(k):
            term = term * (s[:, i] if i in L else c[:, i])
        out += term
    return out


def symmetric_function(kappa, j: int) -> SymmetricFunctionValue:
    """The ``j``-th symmetric function of a list of principal curvatures."""
    return SymmetricFunctionValue(int(j), float(symmetric_function_many([list(kappa)], j)[0]))


def finite_cos_product(kappa, m: int | None = None) -> np.ndarray:
    """``prod (1 + k_i^2)^(-1/2)`` over finite entries among the first ``m``."""
    kappa = np.atleast_2d(np.asarray(kappa, dtype=float))
    if m is not None:
        kappa = kappa[:, :m]
    finite = np.isfinite(kappa)
    kf = np.where(finite, kappa, 0.0)
    return np.prod(np.where(finite, 1.0 / np.sqrt(1.0 + kf * kf), 1.0), axis=1)


def compare_with_smooth(surface, a, u, r_eval: float, on_tol: float = 1e-7, **kw) -> dict:
    """Compare ``Q_A(a, u)`` with the classical second fundamental form.

    ``surface`` is a smooth body from :mod:`curvmeas.smooth`.  The residual is
    ``|Q - (u . N) T^T DN T|_F`` in the computed tangent basis ``T``; the angle
    is the largest principal angle between ``T_A(a, u)`` and ``Tan(M, a)``.
    """
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    if not surface.on_surface(a, on_tol):
        raise NotOnManifold(f"{a.tolist()} is not on the surface")
    N = surface.normal(a)
    if abs(abs(float(np.dot(u, N))) - 1.0) > 1e-6:
        raise NotOnManifold("u is not normal to the surface")
    cd = curvature_at(surface, a, u, r_eval, **kw)
    S = surface.shape_operator(a)
    T = cd.T_basis
    classical = float(np.dot(u, N)) * (T.T @ S @ T)
    resid = float(np.linalg.norm(cd.Q - classical))
    tan = surface.tangent_basis(a)
    if cd.m == tan.shape[1]:
        sv = np.clip(np.linalg.svd(T.T @ tan, compute_uv=False), -1.0, 1.0)
        angle = float(np.arccos(sv.min()))
    else:
        angle = math.pi / 2
    return {"kappa": cd.kappa, "residual": resid, "angle": angle, "m": cd.m, "data": cd}


__all__ = [
    "INF", "CurvatureData", "CurvatureBatch", "SymmetricFunctionValue", "kappa_from_chi",
    "curvature_from_frames", "curvature_at", "symmetric_function", "symmetric_function_many",
    "finite_cos_product", "compare_with_smooth",
]
