"""Finite-difference differentials of the nearest point projection.

``D xi`` is obtained by central differences along the coordinate axes.  The
differential of the spherical image map is then assembled from the identity

    D nu(x) = delta(x)^-1 (P_T - D xi(x)),   T = nu(x)^perp,

and the directly differenced ``D nu`` is kept only as a residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotRegular, StencilOutsideDomain
from .projection import BISECT_TOL, T_MAX, psi_many, rho_from_psi, rho_many
from .scene import DEFAULT_TOL, Scene

STEP_FACTOR = 1e-4
DIFF_TOL = 1e-6
SYM_TOL = 1e-2
KINK_TOL = 1e-2
RHO_SLACK = 10.0
# rho values above this count as equal in the stencil comparison
RHO_CAP = 10.0


@dataclass
class DiffFrame:
    x: np.ndarray
    a: np.ndarray
    u: np.ndarray
    delta: float
    rho: float
    Dxi: np.ndarray
    Dnu: np.ndarray
    chi: np.ndarray
    sym_residual: float
    identity_residual: float
    step: float
    kink_residual: float = 0.0
    Dnu_direct: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.x)


@dataclass
class FrameBatch:
    """Struct-of-arrays version of :class:`DiffFrame`.

    Rows with ``ok == False`` hold garbage in the derivative fields.
    """

    x: np.ndarray
    a: np.ndarray
    u: np.ndarray
    delta: np.ndarray
    rho: np.ndarray
    Dxi: np.ndarray
    Dnu: np.ndarray
    Dnu_direct: np.ndarray
    basis: np.ndarray
    chi: np.ndarray
    sym_residual: np.ndarray
    identity_residual: np.ndarray
    kink_residual: np.ndarray
    step: np.ndarray
    ok: np.ndarray
    stencil: np.ndarray

    def __len__(self):
        return len(self.x)

    def frame(self, i: int) -> DiffFrame:
        return DiffFrame(
            x=self.x[i], a=self.a[i], u=self.u[i], delta=float(self.delta[i]),
            rho=float(self.rho[i]), Dxi=self.Dxi[i], Dnu=self.Dnu[i], chi=self.chi[i],
            sym_residual=float(self.sym_residual[i]),
            identity_residual=float(self.identity_residual[i]),
            step=float(self.step[i]), kink_residual=float(self.kink_residual[i]),
            Dnu_direct=self.Dnu_direct[i],
        )

    def subset(self, mask) -> "FrameBatch":
        return FrameBatch(**{k: getattr(self, k)[mask] for k in self.__dataclass_fields__})


def perp_basis(U: np.ndarray) -> np.ndarray:
    """Orthonormal bases of ``u^perp``, shape (N, n, n - 1)."""
    N, n = U.shape
    if n == 2:
        return np.stack([-U[:, 1], U[:, 0]], axis=1)[:, :, None]
    axis = np.argmin(np.abs(U), axis=1)
    E = np.zeros_like(U)
    E[np.arange(N), axis] = 1.0
    b1 = np.cross(U, E)
    b1 /= np.linalg.norm(b1, axis=1, keepdims=True)
    b2 = np.cross(U, b1)
    return np.stack([b1, b2], axis=2)


def frames_many(scene: Scene, X, step_factor: float = STEP_FACTOR, tol: float = DIFF_TOL,
                rho=None, step_cap: float = np.inf, proj_tol: float = DEFAULT_TOL) -> FrameBatch:
    """Differentials at every row of ``X``.

    The step is ``step_factor * min(delta, (rho - 1) delta, step_cap)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, n = X.shape
    A, U, D, ok = psi_many(scene, X, proj_tol)
    if rho is None:
        R = np.full(N, np.nan)
        if ok.any():
            R[ok] = rho_from_psi(scene, A[ok], U[ok], D[ok])
    else:
        R = np.asarray(rho, dtype=float)
    Dsafe = np.where(ok, D, 1.0)
    span = np.minimum(Dsafe, np.where(np.isfinite(R), (R - 1.0) * Dsafe, np.inf))
    span = np.minimum(span, step_cap)
    h = step_factor * np.where(ok & (span > 0), span, Dsafe)

    E = np.eye(n)
    S = np.concatenate([X[:, None, :] + h[:, None, None] * E[None],
                        X[:, None, :] - h[:, None, None] * E[None]], axis=1)
    As, us, Ds = scene.nearest_many(S.reshape(-1, n), proj_tol)
    As = As.reshape(N, 2 * n, n)
    st_ok = (us & (Ds > proj_tol)).reshape(N, 2 * n).all(axis=1)
    Ds = np.where(Ds > 0, Ds, 1.0).reshape(N, 2 * n)

    Ap, Am = As[:, :n], As[:, n:]
    # columns are D xi(e_j)
    Dxi = np.transpose((Ap - Am) / (2 * h[:, None, None]), (0, 2, 1))
    kink = np.linalg.norm(Ap - 2 * A[:, None, :] + Am, axis=2).max(axis=1) / h

    P = np.eye(n)[None] - U[:, :, None] * U[:, None, :]
    Dnu = (P - Dxi) / Dsafe[:, None, None]
    nus = (S - As) / Ds[:, :, None]
    Dnu_direct = np.transpose((nus[:, :n] - nus[:, n:]) / (2 * h[:, None, None]), (0, 2, 1))
    ident = np.linalg.norm(Dnu_direct - Dnu, axis=(1, 2))

    B = perp_basis(np.where(ok[:, None], U, np.eye(n)[0]))
    M = np.transpose(B, (0, 2, 1)) @ Dnu @ B
    sym = np.linalg.norm(M - np.transpose(M, (0, 2, 1)), axis=(1, 2))
    chi = np.linalg.eigvalsh(0.5 * (M + np.transpose(M, (0, 2, 1))))

    good = ok & st_ok & np.all(np.isfinite(Dxi), axis=(1, 2))
    return FrameBatch(x=X, a=A, u=U, delta=D, rho=R, Dxi=Dxi, Dnu=Dnu, Dnu_direct=Dnu_direct,
                      basis=B, chi=chi, sym_residual=sym, identity_residual=ident,
                      kink_residual=kink, step=h, ok=good, stencil=S)


def regular_many(scene: Scene, X, tol: float = DIFF_TOL, step_factor: float = STEP_FACTOR,
                 sym_tol: float = SYM_TOL, kink_tol: float = KINK_TOL, rho=None,
                 step_cap: float = np.inf):
    """Numerical regularity proxy, returns ``(mask, FrameBatch)``.

    A point passes when it has a unique nearest point, ``rho > 1 + tol``,
    every stencil point has a unique nearest point, the restricted ``D nu``
    is symmetric to ``sym_tol``, forward and backward differences of ``xi``
    agree to ``kink_tol`` and ``rho`` at the stencil points does not drop
    below ``rho(x) * (1 - tol - RHO_SLACK * h / delta)``, with both sides
    capped at ``RHO_CAP``.
    """
    fb = frames_many(scene, X, step_factor, tol, rho=rho, step_cap=step_cap)
    mask = fb.ok & (fb.rho > 1.0 + tol) & (fb.sym_residual <= sym_tol) & (fb.kink_residual <= kink_tol)
    if mask.any():
        idx = np.flatnonzero(mask)
        n = X.shape[1] if np.ndim(X) == 2 else len(X)
        S = fb.stencil[idx].reshape(-1, n)
        Rs = rho_many(scene, S).reshape(len(idx), -1)
        slack = tol + RHO_SLACK * fb.step[idx] / fb.delta[idx]
        floor = np.minimum(fb.rho[idx], RHO_CAP) * (1.0 - slack)
        Rs = np.minimum(np.where(np.isnan(Rs), -1.0, Rs), RHO_CAP)
        good = np.all(Rs >= floor[:, None], axis=1)
        mask[idx[~good]] = False
    return mask, fb


def jacobians(scene: Scene, x, step_factor: float = STEP_FACTOR, tol: float = DIFF_TOL,
              check_regular: bool = True) -> DiffFrame:
    """Differentials of ``xi`` and ``nu`` at a single regular point."""
    if not 0 < step_factor < 0.5:
        raise ValueError("step_factor must lie in (0, 0.5)")
    x = np.asarray(x, dtype=float)
    if check_regular:
        mask, fb = regular_many(scene, x[None], tol=tol, step_factor=step_factor)
    else:
        fb = frames_many(scene, x[None], step_factor, tol)
        mask = fb.ok
    if not fb.ok[0]:
        if np.isfinite(fb.rho[0]) or fb.rho[0] == np.inf:
            raise StencilOutsideDomain(f"stencil around {x.tolist()} leaves U(A)")
        raise NotRegular(f"{x.tolist()} is not in U(A)")
    if not mask[0]:
        raise NotRegular(f"{x.tolist()} fails the regularity test")
    return fb.frame(0)


def _stack_psi(frame: DiffFrame):
    return np.vstack([frame.Dxi, frame.Dnu])


def check_differential_identities(frame: DiffFrame, tol: float = DIFF_TOL, t: float | None = None,
                                  scene: Scene | None = None,
                                  step_factor: float = STEP_FACTOR) -> dict:
    """Residuals of the projection identities at a frame.

    With ``t`` and ``scene`` given, also the chain rule
    ``D psi(x) = D psi(h_t x) o D h_t(x)`` with ``D h_t = D xi + t (I - D xi)``.
    """
    n = frame.dim
    out = {
        "Dxi_T_u": float(np.linalg.norm(frame.Dxi.T @ frame.u)),
        "Dxi_u": float(np.linalg.norm(frame.Dxi @ frame.u)),
        "sym_residual": frame.sym_residual,
        "identity_residual": frame.identity_residual,
        "chain_residual": None,
    }
    if t is not None and scene is not None:
        y = frame.a + t * (frame.x - frame.a)
        fy = jacobians(scene, y, step_factor, tol, check_regular=False)
        Dh = frame.Dxi + t * (np.eye(n) - frame.Dxi)
        out["chain_residual"] = float(np.linalg.norm(_stack_psi(frame) - _stack_psi(fy) @ Dh))
    worst = max(v for v in out.values() if v is not None)
    out["passed"] = bool(worst <= tol)
    return out


def dxi_eigenvalues(Dxi: np.ndarray) -> np.ndarray:
    return np.sort(np.real(np.linalg.eigvals(Dxi)), axis=-1)


def chi_many(scene: Scene, X, **kw) -> np.ndarray:
    return frames_many(scene, X, **kw).chi


__all__ = [
    "BISECT_TOL", "T_MAX", "DiffFrame", "FrameBatch", "frames_many", "regular_many", "jacobians",
    "check_differential_identities", "perp_basis", "dxi_eigenvalues", "chi_many",
]
