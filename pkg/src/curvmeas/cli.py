"""Command line entry point.

Exit codes: 0 on success, 2 when a validation check fails, 3 on a scene or
configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import measures as M
from .bundle import bundle_csv, sample_bundle
from .curvature import curvature_at
from .differential import check_differential_identities, jacobians
from .errors import CurvMeasError, SceneError
from .scene import Scene
from .strata import classify_bundle, classify_many, default_n_dirs, default_probe

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONFIG = 3

TOL_KEYS = {
    "step_factor": 1e-4,
    "diff_tol": 1e-6,
    "s_probe": None,
    "n_dirs": None,
    "agree_rel": 0.02,
    "coarea_gap": 0.02,
    "q_bound": 1e-4,
    "identity": 1e-5,
    "sym_quantile": 1e-4,
}
COMMANDS = ("curvature", "bundle", "measures", "steiner", "strata", "coarea", "checks")


class ConfigError(CurvMeasError):
    pass


def _fmt(v) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _clean(v):
    """JSON-safe copy with infinities as strings."""
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _parse_tols(items) -> dict:
    out = {k: v for k, v in TOL_KEYS.items()}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects K=V, got {item!r}")
        k, v = item.split("=", 1)
        if k not in TOL_KEYS:
            raise ConfigError(f"unknown tolerance key {k!r}; known: {sorted(TOL_KEYS)}")
        try:
            out[k] = float(v)
        except ValueError:
            raise ConfigError(f"tolerance {k} must be a number, got {v!r}") from None
    if out["n_dirs"] is not None:
        out["n_dirs"] = int(out["n_dirs"])
    return out


def _parse_radii(text):
    if text is None:
        return None
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--radii expects comma separated numbers, got {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise ConfigError("--radii must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvmeas",
                                description="Normal bundles, curvatures and support measures of closed sets.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--grid-res", type=int, default=512)
    p.add_argument("--r", type=float, default=None, help="level radius")
    p.add_argument("--radii", default=None, help="comma separated radii for the Steiner fit")
    p.add_argument("--m", type=int, default=None, help="support measure index")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", action="append", default=[], metavar="K=V")
    return p


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(_clean(cfg), sort_keys=True).encode()).hexdigest()


def _report(cfg, est):
    return {"scene": cfg["scene_name"], "m": est.m, "method": est.method, "value": est.value,
            "stderr": est.stderr, "uncaptured": est.uncaptured, "config_hash": cfg["hash"],
            "seed": cfg["seed"]}


def _m_values(scene, m):
    if m is None:
        return list(range(scene.dim))
    if not 0 <= m <= scene.dim - 1:
        raise ConfigError(f"--m must lie in [0, {scene.dim - 1}]")
    return [m]


def cmd_curvature(scene, cfg):
    r = cfg["r"] if cfg["r"] is not None else 0.5
    b = sample_bundle(scene, radii=[r], grid_res=cfg["grid_res"],
                      step_factor=cfg["tol"]["step_factor"], tol=cfg["tol"]["diff_tol"])
    n = scene.dim
    ax = "xyz"[:n]
    cols = [f"a_{c}" for c in ax] + [f"u_{c}" for c in ax] + ["r_eval", "reach", "m"]
    cols += [f"kappa_{i + 1}" for i in range(n - 1)]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for i in range(len(b)):
        row = [_fmt(v) for v in b.a[i]] + [_fmt(v) for v in b.u[i]]
        row += [_fmt(r), _fmt(b.reach[i]), str(int(b.m_T[i]))] + [_fmt(k) for k in b.kappa[i]]
        buf.write(",".join(row) + "\n")
    return buf.getvalue(), True


def _bundle(scene, cfg):
    radii = [cfg["r"]] if cfg["r"] is not None else None
    b = sample_bundle(scene, grid_res=cfg["grid_res"], radii=radii,
                      step_factor=cfg["tol"]["step_factor"], tol=cfg["tol"]["diff_tol"])
    return classify_bundle(b, scene, s_probe=cfg["tol"]["s_probe"], n_dirs=cfg["tol"]["n_dirs"],
                           seed=cfg["seed"])


def cmd_bundle(scene, cfg):
    return bundle_csv(_bundle(scene, cfg)), True


def _steiner(scene, cfg):
    radii = cfg["radii"] or list(M.default_radii(scene.dim))
    # volumes are cheap in the plane, so refine there
    grid = 2 * cfg["grid_res"] if scene.dim == 2 else cfg["grid_res"]
    return M.steiner_fit(scene, radii, grid)


def cmd_measures(scene, cfg):
    out = []
    bundle = _bundle(scene, cfg)
    steiner = None
    try:
        steiner = _steiner(scene, cfg)
    except CurvMeasError:
        steiner = None
    for m in _m_values(scene, cfg["m"]):
        out.append(_report(cfg, M.mu_global(scene, m, bundle=bundle)))
        out.append(_report(cfg, M.mu_stratified(scene, m, grid_res=cfg["grid_res"], seed=cfg["seed"])))
        if steiner is not None:
            out.append(_report(cfg, steiner[m]))
    return _dump(out), True


def cmd_steiner(scene, cfg):
    ests = _steiner(scene, cfg)
    keep = _m_values(scene, cfg["m"])
    return _dump([_report(cfg, e) for e in ests if e.m in keep]), True


def cmd_strata(scene, cfg):
    b = _bundle(scene, cfg)
    key = np.round(b.a, 9)
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    A = b.a[first]
    m, dis, conf = classify_many(scene, A, cfg["tol"]["s_probe"], cfg["tol"]["n_dirs"],
                                 seed=cfg["seed"])
    n = scene.dim
    buf = io.StringIO()
    buf.write(",".join([f"a_{c}" for c in "xyz"[:n]] + ["m", "dis_dim", "confidence"]) + "\n")
    for i in range(len(A)):
        buf.write(",".join([_fmt(v) for v in A[i]] + [str(int(m[i])), str(int(dis[i])),
                                                       _fmt(conf[i])]) + "\n")
    return buf.getvalue(), True


def cmd_coarea(scene, cfg):
    ms = [cfg["m"]] if cfg["m"] is not None else [scene.dim - 1]
    bundle = _bundle(scene, cfg)
    out = []
    ok = True
    for m in ms:
        res = M.coarea_check(scene, m, grid_res=cfg["grid_res"], bundle=bundle, seed=cfg["seed"])
        res["passed"] = bool(res["gap"] <= cfg["tol"]["coarea_gap"])
        ok &= res["passed"]
        res.update({"scene": cfg["scene_name"], "config_hash": cfg["hash"], "seed": cfg["seed"]})
        out.append(res)
    return _dump(out), ok


def run_checks(scene, cfg) -> list[dict]:
    """Invariant suite on one scene; each entry has a name, value, bound and
    a pass flag."""
    t = cfg["tol"]
    rng = np.random.default_rng(cfg["seed"])
    checks = []

    def add(name, value, bound, passed):
        checks.append({"name": name, "value": value, "bound": bound, "passed": bool(passed)})

    # distance is 1-Lipschitz
    lo, hi = scene.bbox
    X = rng.uniform(lo, hi, size=(2000, scene.dim))
    Y = X + rng.normal(scale=0.1, size=X.shape)
    lip = float(np.max(np.abs(scene.delta_many(X) - scene.delta_many(Y)) - np.linalg.norm(X - Y, axis=1)))
    add("delta_lipschitz", lip, 1e-12, lip <= 1e-12)

    b = _bundle(scene, cfg)
    add("bundle_nonempty", len(b), 1, len(b) > 0)
    if len(b) == 0:
        return checks

    # strata partition
    parts = sum(float(b.weight[b.stratum == m].sum()) for m in range(scene.dim))
    rel = abs(parts - b.total_weight) / b.total_weight
    add("strata_partition", rel, 0.005, rel <= 0.005)

    # Q lower bound
    qm = float(np.min(b.q_margin))
    add("q_lower_bound", qm, -t["q_bound"], qm >= -t["q_bound"])

    # differential identities on a seeded subsample
    idx = np.sort(rng.choice(len(b), size=min(100, len(b)), replace=False))
    worst = {"Dxi_T_u": 0.0, "identity_residual": 0.0}
    for i in idx:
        x = b.a[i] + b.r_src[i] * b.u[i]
        try:
            fr = jacobians(scene, x, t["step_factor"], t["diff_tol"])
        except CurvMeasError:
            continue
        d = check_differential_identities(fr, t["identity"])
        for k in worst:
            worst[k] = max(worst[k], d[k])
    for k, v in worst.items():
        add(k, v, t["identity"], v <= t["identity"])
    q99 = float(np.quantile(b.sym_residual, 0.99))
    add("sym_residual_q99", q99, t["sym_quantile"], q99 <= t["sym_quantile"])

    # r-coherence of curvatures at a few regular points
    worst_r = 0.0
    for i in idx[:20]:
        if b.m_T[i] == 0:
            continue
        r1 = float(b.r_src[i])
        try:
            k1 = curvature_at(scene, b.a[i], b.u[i], r1, reach=b.reach[i]).kappa
            k2 = curvature_at(scene, b.a[i], b.u[i], 0.5 * r1, reach=b.reach[i]).kappa
        except CurvMeasError:
            continue
        fin = np.isfinite(k1) & np.isfinite(k2)
        if np.any(np.isfinite(k1) != np.isfinite(k2)):
            worst_r = math.inf
        elif fin.any():
            worst_r = max(worst_r, float(np.max(np.abs(k1[fin] - k2[fin]))))
    add("r_independence", worst_r, 1e-3, worst_r <= 1e-3)

    # coarea identity on the top stratum
    m = scene.dim - 1
    res = M.coarea_check(scene, m, grid_res=cfg["grid_res"], bundle=b, seed=cfg["seed"])
    add(f"coarea_m{m}", res["gap"], t["coarea_gap"], res["gap"] <= t["coarea_gap"])

    # agreement of the estimators where a Steiner fit applies
    try:
        steiner = _steiner(scene, cfg)
    except CurvMeasError:
        steiner = None
    for m in range(scene.dim):
        g = M.mu_global(scene, m, bundle=b)
        s = M.mu_stratified(scene, m, grid_res=cfg["grid_res"], seed=cfg["seed"])
        pairs = [("stratified", s)] + ([("steiner", steiner[m])] if steiner else [])
        for name, e in pairs:
            diff = abs(g.value - e.value)
            bound = 3 * math.hypot(g.stderr, e.stderr) + t["agree_rel"] * max(abs(g.value), 1e-12)
            add(f"mu{m}_global_vs_{name}", diff, bound, diff <= bound)
    return checks


def cmd_checks(scene, cfg):
    checks = run_checks(scene, cfg)
    ok = all(c["passed"] for c in checks)
    t = cfg["tol"]
    meta = {"s_probe": default_probe(scene) if t["s_probe"] is None else t["s_probe"],
            "n_dirs": default_n_dirs(scene.dim) if t["n_dirs"] is None else t["n_dirs"],
            "h_infinite_convention": "cos -> 0, sin -> 1 for kappa = inf"}
    doc = {"scene": cfg["scene_name"], "config_hash": cfg["hash"], "seed": cfg["seed"],
           "passed": ok, "meta": meta, "checks": checks}
    return _dump(doc), ok


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


HANDLERS = {
    "curvature": cmd_curvature,
    "bundle": cmd_bundle,
    "measures": cmd_measures,
    "steiner": cmd_steiner,
    "strata": cmd_strata,
    "coarea": cmd_coarea,
    "checks": cmd_checks,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        scene = Scene.load(args.scene)
        if args.grid_res <= 0:
            raise ConfigError("--grid-res must be positive")
        if args.r is not None and not args.r > 0:
            raise ConfigError("--r must be positive")
        tol = _parse_tols(args.tol)
        cfg = {
            "command": args.command,
            "scene": scene.to_dict(),
            "scene_name": Path(args.scene).name,
            "grid_res": args.grid_res,
            "r": args.r,
            "radii": _parse_radii(args.radii),
            "m": args.m,
            "seed": args.seed,
            "tol": tol,
        }
        cfg["hash"] = config_hash({k: v for k, v in cfg.items() if k != "scene_name"})
        text, ok = HANDLERS[args.command](scene, cfg)
    except (SceneError, ConfigError, OSError) as exc:
        print(f"curvmeas: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CurvMeasError as exc:
        print(f"curvmeas: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            pass
    return EXIT_OK if ok else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
