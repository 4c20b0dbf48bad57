"""Command-line verification harness: verify / sweep / report.

Configuration is TOML ([run] and [functions] tables); command-line flags
override config values.  Each run writes report.json (one row per executed
verification) and, on request, residuals.csv with one row per grid point of
the residual field.  Exit code 0 iff every requested identity passed.

With [run].deterministic = true the report is byte-identical across
repeated runs: the run id becomes a hash of the effective config and wall
times are recorded as 0.  FRACLAB_THREADS bounds the sweep worker pool.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
import uuid
from concurrent.futures import ThreadPoolExecutor

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .kato import build_strip_mesh, verify_kato
from .manifolds import GridField, analyze, integrate, synthesize
from .operators import (
    extension_oracle_heat,
    extension_slice,
    frac_laplacian,
    poisson_multiplier,
    singular_integral_oracle_circle,
)
from .duhamel import duhamel_mode_check
from .presets import make_field, make_manifold, make_nonlinearity
from .special import make_frac_params
from .verifiers import (
    default_tolerance,
    rules_for,
    verify_bochner,
    verify_cordoba,
    verify_decay,
    verify_gamma2,
    verify_leibniz,
    verify_sv,
)

IDENTITIES = ["leibniz", "bochner", "gamma2", "cordoba", "sv", "kato",
              "duhamel-mode", "decay", "oracles"]

_RUN_DEFAULTS = {
    "manifold": "circle",
    "s": [0.5],
    "modes": 32,
    "z_nodes": None,
    "tol": None,
    "deterministic": False,
    "out": "fraclab-out",
    "identities": [],
    "emit_residuals": False,
}

_FN_DEFAULTS = {
    "circle": {"u": "cos", "v": "sin2", "phi": "1"},
    "torus": {"u": "cosxcosy", "v": "cosx+cos2y", "phi": "1"},
    "sphere": {"u": "y10+0.5y21", "v": "y10", "phi": "1"},
}


def load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _effective_config(args) -> dict:
    cfg = {"run": dict(_RUN_DEFAULTS), "functions": {}}
    if getattr(args, "config", None):
        file_cfg = load_config(args.config)
        cfg["run"].update(file_cfg.get("run", {}))
        cfg["functions"].update(file_cfg.get("functions", {}))
    run = cfg["run"]
    if getattr(args, "identity", None):
        run["identities"] = [args.identity]
    for key, attr in [("manifold", "manifold"), ("modes", "modes"),
                      ("z_nodes", "z_nodes"), ("tol", "tol"), ("out", "out")]:
        val = getattr(args, attr, None)
        if val is not None:
            run[key] = val
    if getattr(args, "s", None):
        run["s"] = [float(t) for t in str(args.s).split(",")]
    if getattr(args, "deterministic", False):
        run["deterministic"] = True
    if getattr(args, "emit_residuals", False):
        run["emit_residuals"] = True
    fns = cfg["functions"]
    for key in ("u", "v", "phi"):
        val = getattr(args, key, None)
        if val is not None:
            fns[key] = val
    if getattr(args, "q", None):
        fns["q"] = [float(t) for t in str(args.q).split(",")]
    if getattr(args, "nonlinearity", None):
        fns["nonlinearity"] = str(args.nonlinearity).split(",")
    defaults = _FN_DEFAULTS[run["manifold"]]
    for key, val in defaults.items():
        fns.setdefault(key, val)
    fns.setdefault("q", [2.0, 3.0, 4.0])
    fns.setdefault("nonlinearity", ["quartic"])
    return cfg


def _mean(field_or_scalar):
    if isinstance(field_or_scalar, GridField):
        return integrate(field_or_scalar) / field_or_scalar.manifold.volume
    if field_or_scalar is None:
        return None
    return float(field_or_scalar)


def _row(report, run_id: str, wall_ms: float, deterministic: bool) -> dict:
    md = report.metadata or {}
    return {
        "run_id": run_id,
        "identity": report.identity,
        "manifold": report.manifold,
        "s": report.s,
        "modes": report.resolution,
        "z_nodes": report.z_nodes,
        "residual_sup": report.residual_sup,
        "residual_l2": report.residual_l2,
        "lhs_mean": _mean(report.lhs),
        "rhs_mean": _mean(report.rhs),
        "tail_error_estimate": md.get("tail_error_estimate"),
        "pass": bool(report.passed),
        "wall_time_ms": 0.0 if deterministic else wall_ms,
    }


def _mk_synthetic_report(identity, man, s, resid, tol, lhs=None, rhs=None, z_nodes=0, md=None):
    from .verifiers import IdentityReport

    return IdentityReport(
        identity=identity, manifold=man.kind, s=s, resolution=man.resolution,
        z_nodes=z_nodes, lhs=lhs, rhs=rhs, residual_sup=resid, residual_l2=resid,
        tolerance=tol, passed=resid <= tol, metadata=md or {},
    )


def _run_oracles(man, p, tol):
    """Oracle-equivalence suite: heat vs multiplier, singular-integral shape, theta closed form."""
    reports = []
    u2 = make_field(man, [[2, 1.0, 0.0]] if man.kind == "circle" else "y10")
    worst = 0.0
    for z in (0.4, 1.0, 2.5):
        heat = extension_oracle_heat(u2, p, z)
        mult = extension_slice(u2, p, z).u_slice
        worst = max(worst, float(np.max(np.abs(heat.values - mult.values))))
    reports.append(_mk_synthetic_report("oracles:heat", man, p.s, worst, 1e-8))
    if man.kind == "circle":
        x = man.nodes(1)
        cal = singular_integral_oracle_circle(make_field(man, "cos"), p.s)
        const = float(np.max(cal.values))
        pred = singular_integral_oracle_circle(make_field(man, "cos2"), p.s)
        err = float(np.max(np.abs(pred.values / const - 4.0**p.s * np.cos(2 * x)))) / 4.0**p.s
        reports.append(_mk_synthetic_report("oracles:singular", man, p.s, err, 1e-5))
    p_half = make_frac_params(0.5)
    r = np.array([0.1, 1.0, 5.0])
    err = float(np.max(np.abs(poisson_multiplier(p_half, r) - np.exp(-r))))
    reports.append(_mk_synthetic_report("oracles:theta-half", man, p.s, err, 1e-11))
    return reports


def _run_duhamel_mode(man, p):
    cases = [
        ("z*exp(-z), lam=1", lambda z: z * np.exp(-z), 1.0,
         lambda z: (1 - z) * np.exp(-z), lambda z: (z - 2) * np.exp(-z), 1e-9),
        ("z^2*exp(-z), lam=4", lambda z: z * z * np.exp(-z), 4.0,
         lambda z: (2 * z - z * z) * np.exp(-z), lambda z: (2 - 4 * z + z * z) * np.exp(-z), 1e-7),
    ]
    reports = []
    for name, g, lam, dg, d2g, tol in cases:
        resid = duhamel_mode_check(g, lam, p, g_deriv=dg, g_deriv2=d2g)
        reports.append(_mk_synthetic_report(f"duhamel-mode:{name}", man, p.s, resid, tol))
    return reports


def execute_one(identity: str, cfg: dict, s: float):
    """Run one identity at one order; returns a list of IdentityReports."""
    run = cfg["run"]
    fns = cfg["functions"]
    man = make_manifold(run["manifold"], int(run["modes"]))
    p = make_frac_params(float(s))
    tol = run["tol"]
    z_nodes = run["z_nodes"]
    rules = rules_for(man, p, z_nodes=int(z_nodes)) if z_nodes else None
    u = make_field(man, fns["u"])
    if identity == "leibniz":
        v = make_field(man, fns["v"])
        return [verify_leibniz(u, v, p, rules, rel_tol=tol)]
    if identity == "bochner":
        return [verify_bochner(u, p, rules, rel_tol=tol)]
    if identity == "gamma2":
        return [verify_gamma2(u, p, rules, rel_tol=tol)]
    if identity == "cordoba":
        return [verify_cordoba(u, make_nonlinearity(name), p, rules, rel_tol=tol)
                for name in fns["nonlinearity"]]
    if identity == "sv":
        return [verify_sv(u, q, p, rules, rel_tol=tol) for q in fns["q"]]
    if identity == "kato":
        phi = make_field(man, fns["phi"])
        return [verify_kato(u, phi, p, rel_tol=tol if tol else 1e-3)]
    if identity == "decay":
        return [verify_decay(u, p, rules=rules or rules_for(man, p))]
    if identity == "duhamel-mode":
        return _run_duhamel_mode(man, p)
    if identity == "oracles":
        return _run_oracles(man, p, tol)
    raise ValueError(f"unknown identity {identity!r}")


def run(cfg: dict):
    """Execute the configured verifications; returns (exit_code, report dict)."""
    run_cfg = cfg["run"]
    deterministic = bool(run_cfg.get("deterministic"))
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    run_id = hashlib.sha256(blob).hexdigest()[:12] if deterministic else uuid.uuid4().hex[:12]
    rows = []
    reports = []
    for identity in run_cfg["identities"]:
        for s in run_cfg["s"]:
            t0 = time.perf_counter()
            for rep in execute_one(identity, cfg, s):
                wall = (time.perf_counter() - t0) * 1000.0
                rows.append(_row(rep, run_id, round(wall, 3), deterministic))
                reports.append(rep)
    report = {"run_id": run_id, "version": __version__, "results": rows}
    out = run_cfg.get("out")
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if run_cfg.get("emit_residuals"):
            _write_residuals(os.path.join(out, "residuals.csv"), reports)
    code = 0 if all(r["pass"] for r in rows) else 1
    return code, report


def _write_residuals(path: str, reports):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["identity", "s", "index", "lhs", "rhs", "residual"])
        for rep in reports:
            if not isinstance(rep.lhs, GridField):
                continue
            lv = rep.lhs.values.ravel()
            rv = rep.rhs.values.ravel()
            for i, (a, b) in enumerate(zip(lv, rv)):
                wr.writerow([rep.identity, rep.s, i, repr(a), repr(b), repr(a - b)])


def _print_rows(rows):
    hdr = f"{'identity':<28} {'manifold':<8} {'s':>5} {'residual_sup':>13} {'pass':>5}"
    print(hdr)
    print("-" * len(hdr))
    for r in rows:
        print(f"{r['identity']:<28} {r['manifold']:<8} {r['s']:>5.3g} "
              f"{r['residual_sup']:>13.3e} {str(r['pass']):>5}")


def cmd_verify(args) -> int:
    cfg = _effective_config(args)
    if not cfg["run"]["identities"]:
        code, report = run(cfg)
        print("no identities requested; empty report written")
        return code
    code, report = run(cfg)
    _print_rows(report["results"])
    return code


def cmd_sweep(args) -> int:
    cfg = _effective_config(args)
    identity = args.identity
    param = args.param.replace("-", "_")
    values = [int(v) for v in args.values.split(",")]
    max_workers = int(os.environ.get("FRACLAB_THREADS", "0")) or None

    def one(val):
        local = json.loads(json.dumps(cfg))
        if param == "mesh_level":
            # kato-only: run with `val` refinements and report the finest level
            man = make_manifold(local["run"]["manifold"], int(local["run"]["modes"]))
            p = make_frac_params(float(local["run"]["s"][0]))
            u = make_field(man, local["functions"]["u"])
            phi = make_field(man, local["functions"]["phi"])
            rep = verify_kato(u, phi, p, refinements=val)
            return val, rep.metadata["residual_per_level"][-1]
        local["run"][param] = val
        reps = execute_one(identity, local, float(local["run"]["s"][0]))
        return val, max(r.residual_sup for r in reps)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = sorted(pool.map(one, values))
    xs = np.array([float(v) for v, _ in results])
    ys = np.array([max(r, 1e-300) for _, r in results])
    if param == "mesh_level":
        # order in the cell-size halving
        slope = float(np.polyfit(xs * math.log10(2.0), -np.log10(ys), 1)[0]) if len(xs) > 1 else 0.0
    else:
        slope = float(np.polyfit(np.log10(xs), np.log10(ys), 1)[0]) if len(xs) > 1 else 0.0
    out = cfg["run"].get("out")
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([param, "residual_sup"])
            for v, r in results:
                wr.writerow([v, repr(r)])
    print(f"{param:>12} {'residual_sup':>14}")
    for v, r in results:
        print(f"{v:>12} {r:>14.3e}")
    print(f"log-log slope: {slope:+.2f}")
    return 0


def cmd_report(args) -> int:
    path = os.path.join(args.out, "report.json")
    with open(path) as fh:
        report = json.load(fh)
    print(f"run {report['run_id']} (fraclab {report.get('version', '?')})")
    _print_rows(report["results"])
    return 0 if all(r["pass"] for r in report["results"]) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraclab",
                                 description="verify exact identities of the spectral fractional Laplacian")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--manifold", choices=["circle", "torus", "sphere"])
    common.add_argument("--s", help="order(s) in (0,1), comma-separated")
    common.add_argument("--modes", type=int, help="mode cutoff N (or degree L)")
    common.add_argument("--z-nodes", dest="z_nodes", type=int, help="z-quadrature node budget")
    common.add_argument("--tol", type=float, help="relative sup tolerance")
    common.add_argument("--u", help="field preset or coefficient list")
    common.add_argument("--v", help="second field preset")
    common.add_argument("--phi", help="test function preset")
    common.add_argument("--q", help="Stroock-Varopoulos exponents, comma-separated")
    common.add_argument("--nonlinearity", help="cordoba nonlinearities, comma-separated")
    common.add_argument("--out", help="output directory (report.json, residuals.csv)")
    common.add_argument("--deterministic", action="store_true",
                        help="byte-identical reports (hashed run id, zeroed wall times)")
    common.add_argument("--emit-residuals", action="store_true",
                        help="also write residuals.csv (one row per grid point)")

    pv = sub.add_parser("verify", parents=[common], help="run one identity (or a config's list)")
    pv.add_argument("identity", nargs="?", choices=IDENTITIES)
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("sweep", parents=[common], help="convergence sweep over one parameter")
    ps.add_argument("--identity", required=True, choices=IDENTITIES)
    ps.add_argument("--param", required=True, choices=["z-nodes", "modes", "mesh-level"])
    ps.add_argument("--values", required=True, help="comma-separated parameter values")
    ps.set_defaults(func=cmd_sweep)

    pr = sub.add_parser("report", help="re-render an existing report.json")
    pr.add_argument("--out", default="fraclab-out")
    pr.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
