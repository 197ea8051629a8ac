"""Stratification of ``A`` by the dimension of the normal cone.

A point ``a`` lies in the ``m``-th stratum when the convex cone ``Dis(A, a)``
of directions ``u`` with ``delta(a + s u) = s`` for small ``s`` has dimension
``n - m``.  The cone is probed with a quasi-uniform set of unit vectors at a
single small scale ``s_probe``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotOnSet

RANK_THRESHOLD = 0.15
ON_SET_TOL = 1e-7


@dataclass(frozen=True)
class StratumLabel:
    a: tuple
    m: int
    dis_dim: int
    confidence: float


def direction_set(n: int, n_dirs: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform unit vectors: shifted equal angles in 2-d, a randomly
    rotated Fibonacci lattice in 3-d."""
    rng = np.random.default_rng(seed)
    if n == 2:
        off = rng.uniform(0.0, 1.0)
        th = 2 * math.pi * (np.arange(n_dirs) + off) / n_dirs
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    i = np.arange(n_dirs) + 0.5
    z = 1 - 2 * i / n_dirs
    phi = math.pi * (3 - math.sqrt(5)) * i
    rr = np.sqrt(1 - z * z)
    P = np.stack([rr * np.cos(phi), rr * np.sin(phi), z], axis=1)
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    return P @ Q.T


def angular_resolution(n: int, n_dirs: int) -> float:
    if n == 2:
        return 2 * math.pi / n_dirs
    return 0.75 * math.sqrt(4 * math.pi / n_dirs)


def default_probe(scene) -> float:
    return 1e-3 * scene.diameter


def default_n_dirs(n: int) -> int:
    return 256 if n == 2 else 2048


def _dis_dim(Ud: np.ndarray, n: int):
    """Rank of the accepted direction matrix and a confidence in [0, 1].

    A singular value ratio within a factor of two below the threshold is
    ambiguous; ambiguity resolves to the larger cone, i.e. the lower stratum.
    """
    if len(Ud) == 0:
        return 0, 1.0
    s = np.linalg.svd(Ud, compute_uv=False)
    ratios = np.maximum(s / s[0], 1e-300)
    k = int(np.sum(ratios > RANK_THRESHOLD))
    if len(s) == 1:
        return k, 1.0
    gap = np.abs(np.log(ratios[1:] / RANK_THRESHOLD)).min()
    conf = float(min(1.0, gap / math.log(1 / RANK_THRESHOLD)))
    if k < len(s) and ratios[k] > 0.5 * RANK_THRESHOLD:
        k += 1
    return k, conf


def classify_many(scene, A, s_probe: float | None = None, n_dirs: int | None = None,
                  tol: float = 1e-12, seed: int = 0, on_set_tol: float = ON_SET_TOL):
    """Strata of every row of ``A``: returns ``(m, dis_dim, confidence)`` arrays."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    N, n = A.shape
    if np.any(scene.delta_many(A) > on_set_tol):
        raise NotOnSet("stratum requested for a point outside A")
    s = default_probe(scene) if s_probe is None else float(s_probe)
    K = default_n_dirs(n) if n_dirs is None else int(n_dirs)
    Udirs = direction_set(n, K, seed)
    theta = angular_resolution(n, K)
    dis = np.zeros(N, dtype=int)
    conf = np.ones(N)
    step = max(1, (1 << 16) // K)
    for b in range(0, N, step):
        Ab = A[b:b + step]
        P = (Ab[:, None, :] + s * Udirs[None]).reshape(-1, n)
        d = scene.delta_many(P).reshape(len(Ab), K)
        for i in range(len(Ab)):
            acc = d[i] >= s * math.cos(theta) - tol
            if not acc.any():
                # the nearest probe may miss a single normal; widen once
                acc = d[i] >= s * math.cos(2 * theta) - tol
            k, c = _dis_dim(Udirs[acc], n)
            dis[b + i] = k
            conf[b + i] = c
    return n - dis, dis, conf


def classify_stratum(scene, a, s_probe: float | None = None, n_dirs: int | None = None,
                     tol: float = 1e-12, seed: int = 0) -> StratumLabel:
    m, dis, conf = classify_many(scene, np.asarray(a, dtype=float)[None], s_probe, n_dirs, tol, seed)
    return StratumLabel(tuple(float(v) for v in a), int(m[0]), int(dis[0]), float(conf[0]))


def classify_bundle(bundle, scene, s_probe: float | None = None, n_dirs: int | None = None,
                    tol: float = 1e-12, seed: int = 0, decimals: int = 9):
    """Copy of ``bundle`` with the ``stratum`` field set for every point."""
    if len(bundle) == 0:
        return bundle.subset(np.zeros(0, dtype=bool))
    key = np.round(bundle.a, decimals)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    # classify one representative base point per group
    first = np.zeros(len(uniq), dtype=int)
    first[inv[::-1]] = np.arange(len(inv))[::-1]
    m, _, _ = classify_many(scene, bundle.a[first], s_probe, n_dirs, tol, seed)
    out = bundle.subset(np.ones(len(bundle), dtype=bool))
    out.stratum = m[inv].astype(int)
    return out


def restrict_bundle(bundle, m: int, scene=None, **kw):
    """Bundle points whose base point lies in the ``m``-th stratum."""
    if np.any(bundle.stratum < 0):
        if scene is None:
            raise ValueError("bundle is not classified and no scene was given")
        bundle = classify_bundle(bundle, scene, **kw)
    return bundle.subset(bundle.stratum == m)


__all__ = [
    "StratumLabel", "direction_set", "classify_many", "classify_stratum", "classify_bundle",
    "restrict_bundle", "default_probe", "default_n_dirs", "angular_resolution",
]
