"""Smooth parametric bodies with analytic normals and shape operators.

Each body exposes the same batched oracle interface as :class:`Scene`
(``dim``, ``delta_many``, ``nearest_many``, ``bbox``) so that the numerical
pipeline can run on it unchanged, plus the classical differential geometry of
its boundary: ``normal(a)`` (outward for the solid body), ``shape_operator(a)``
(the differential of the outward normal field, an ``n x n`` matrix vanishing
on the normal line) and ``tangent_basis(a)``.

With ``complement=True`` the closed set is the closure of the exterior; the
boundary, normals and shape operator are unchanged.
"""

from __future__ import annotations

import numpy as np

from .scene import DEFAULT_TOL


class SmoothBody:
    dim: int
    complement: bool = False

    def _foot(self, X):
        """Boundary foot point and uniqueness flag for every row of ``X``."""
        raise NotImplementedError

    def _inside(self, X):
        raise NotImplementedError

    def delta_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F, _ = self._foot(X)
        d = np.linalg.norm(X - F, axis=1)
        in_set = self._inside(X) != self.complement
        return np.where(in_set, 0.0, d)

    def nearest_many(self, X, tol: float = DEFAULT_TOL):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F, uniq = self._foot(X)
        in_set = self._inside(X) != self.complement
        D = np.where(in_set, 0.0, np.linalg.norm(X - F, axis=1))
        A = np.where(in_set[:, None], X, F)
        return A, uniq | in_set, D

    def on_surface(self, a, tol: float = 1e-7) -> bool:
        a = np.asarray(a, dtype=float)
        F, _ = self._foot(a[None])
        return bool(np.linalg.norm(F[0] - a) <= tol)

    def tangent_basis(self, a):
        N = self.normal(a)
        _, _, vt = np.linalg.svd(N[None, :])
        return vt[1:].T

    @property
    def bbox(self):
        return self._bbox

    @property
    def diameter(self):
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))


class SmoothSphere(SmoothBody):
    """Round ball of radius ``R`` (a disc when ``dim == 2``)."""

    def __init__(self, c, R: float, complement: bool = False):
        self.c = np.asarray(c, dtype=float)
        self.R = float(R)
        self.dim = len(self.c)
        self.complement = complement
        self._bbox = (self.c - 2 * self.R - 1, self.c + 2 * self.R + 1)

    def _foot(self, X):
        V = X - self.c
        r = np.linalg.norm(V, axis=1)
        safe = np.where(r > 0, r, 1.0)
        return self.c + self.R * V / safe[:, None], r > 1e-12

    def _inside(self, X):
        return np.linalg.norm(X - self.c, axis=1) <= self.R

    def normal(self, a):
        v = np.asarray(a, dtype=float) - self.c
        return v / np.linalg.norm(v)

    def shape_operator(self, a):
        N = self.normal(a)
        return (np.eye(self.dim) - np.outer(N, N)) / self.R


class SmoothTorus(SmoothBody):
    """Solid torus around the z-axis with radii ``R0 > r0``."""

    def __init__(self, R0: float, r0: float, complement: bool = False):
        if not R0 > r0 > 0:
            raise ValueError("need R0 > r0 > 0")
        self.R0, self.r0 = float(R0), float(r0)
        self.dim = 3
        self.complement = complement
        e = R0 + r0 + 1
        self._bbox = (np.array([-e, -e, -r0 - 1]), np.array([e, e, r0 + 1]))

    def _core(self, X):
        rho = np.linalg.norm(X[:, :2], axis=1)
        safe = np.where(rho > 0, rho, 1.0)
        C = np.zeros_like(X)
        C[:, 0] = self.R0 * X[:, 0] / safe
        C[:, 1] = self.R0 * X[:, 1] / safe
        return C, rho

    def _foot(self, X):
        C, rho = self._core(X)
        V = X - C
        d = np.linalg.norm(V, axis=1)
        safe = np.where(d > 0, d, 1.0)
        return C + self.r0 * V / safe[:, None], (rho > 1e-12) & (d > 1e-12)

    def _inside(self, X):
        C, _ = self._core(X)
        return np.linalg.norm(X - C, axis=1) <= self.r0

    def normal(self, a):
        a = np.asarray(a, dtype=float)
        C, _ = self._core(a[None])
        v = a - C[0]
        return v / np.linalg.norm(v)

    def shape_operator(self, a):
        a = np.asarray(a, dtype=float)
        N = self.normal(a)
        rho = np.linalg.norm(a[:2])
        e_phi = np.array([-a[1], a[0], 0.0]) / rho
        e_th = np.cross(N, e_phi)
        # curvature along the parallel is cos(theta) / rho with cos(theta) = N . e_rho
        k_phi = float(np.dot(N[:2], a[:2] / rho)) / rho
        return k_phi * np.outer(e_phi, e_phi) + np.outer(e_th, e_th) / self.r0


class SmoothEllipse(SmoothBody):
    """Filled ellipse ``(x/p)^2 + (y/q)^2 <= 1``; the foot point is found by
    dense sampling of the parameter followed by Newton steps."""

    def __init__(self, p: float, q: float, complement: bool = False, samples: int = 4096):
        self.p, self.q = float(p), float(q)
        self.dim = 2
        self.complement = complement
        self._t = (np.arange(samples) + 0.5) * (2 * np.pi / samples)
        e = max(p, q) + 1
        self._bbox = (np.array([-e, -e]), np.array([e, e]))

    def point(self, t):
        return np.stack([self.p * np.cos(t), self.q * np.sin(t)], axis=-1)

    def _foot(self, X):
        P = self.point(self._t)
        out = np.empty_like(X)
        uniq = np.ones(len(X), dtype=bool)
        for s in range(0, len(X), 2048):
            Xs = X[s:s + 2048]
            d2 = ((Xs[:, None, :] - P[None]) ** 2).sum(axis=2)
            t = self._t[np.argmin(d2, axis=1)]
            for _ in range(30):
                c, sn = np.cos(t), np.sin(t)
                dx, dy = self.p * c - Xs[:, 0], self.q * sn - Xs[:, 1]
                g = -self.p * sn * dx + self.q * c * dy
                h = (self.p * sn) ** 2 + (self.q * c) ** 2 - self.p * c * dx - self.q * sn * dy
                t = t - g / np.where(np.abs(h) > 1e-300, h, 1e-300)
            out[s:s + 2048] = self.point(t)
        return out, uniq

    def _inside(self, X):
        return (X[:, 0] / self.p) ** 2 + (X[:, 1] / self.q) ** 2 <= 1.0

    def _param(self, a):
        return float(np.arctan2(a[1] / self.q, a[0] / self.p))

    def normal(self, a):
        t = self._param(a)
        v = np.array([self.q * np.cos(t), self.p * np.sin(t)])
        return v / np.linalg.norm(v)

    def curvature(self, t):
        return self.p * self.q / (self.p ** 2 * np.sin(t) ** 2 + self.q ** 2 * np.cos(t) ** 2) ** 1.5

    def shape_operator(self, a):
        t = self._param(a)
        N = self.normal(a)
        T = np.array([-N[1], N[0]])
        return self.curvature(t) * np.outer(T, T)


__all__ = ["SmoothBody", "SmoothSphere", "SmoothTorus", "SmoothEllipse"]
