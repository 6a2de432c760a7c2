"""Command-line front end.

Exit codes: 0 pass, 1 a mathematical verdict failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import catalog, claims
from . import dynamics as dyn
from . import equilibrium as eqm
from . import geometry, reduction, symmetry
from .expr import DomainError, ExprError
from .subspace import ToleranceConfig
from .symmetry import LevelSpec, NotOnLevel
from .system import SystemFileError, System

REPORT_SCHEMA = "psmech.report/1"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _tolerances(cfg):
    return {**cfg.as_dict(), "momentum": symmetry.MOMENTUM_TOL, "cocycle": symmetry.COCYCLE_TOL,
            "closed": geometry.CLOSED_TOL, "equilibrium_residual": eqm.RESIDUAL_TOL,
            "gauge": eqm.GAUGE_TOL, "dynamics_reduction": reduction.DYNAMICS_TOL,
            "drift": dyn.DRIFT_TOL, "rk45_rtol": dyn.RTOL, "rk45_atol": dyn.ATOL}


def envelope(command, system, seed, cfg, passed, result):
    return {"schema": REPORT_SCHEMA, "tool": "psmech", "version": __version__, "command": command,
            "system": system, "seed": seed, "tolerances": _tolerances(cfg), "passed": passed,
            "result": claims._plain(result)}


def emit(doc, out):
    # build the whole text first so the output is written in one go
    text = json.dumps(doc, indent=2, allow_nan=True) + "\n"
    out.write(text)
    out.flush()


def _floats(text, what):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_params(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            raise InputError(f"--param {key}: cannot parse value {val!r}") from None
    return out


def load_system(path) -> System:
    S = System.load(path)
    probe = S.sample_points(5, np.random.default_rng(0))
    bad = S.skew_violations(probe)
    if bad:
        raise InputError("form is not skew-symmetric: " + "; ".join(bad[:5]))
    return S


# ---------------------------------------------------------------------------
# commands

def cmd_check(args, cfg, out):
    S = load_system(args.file)
    rng = np.random.default_rng(args.seed)
    pts = S.sample_points(args.points, rng)
    st = geometry.verify_structure(S.structure, pts, cfg)
    result = {"structure": st.as_dict()}
    ok = st.passed
    if S.symmetry is not None:
        mom = symmetry.verify_momentum(S.structure, S.symmetry, pts)
        result["momentum"] = mom.as_dict()
        ok &= mom.passed
        if S.symmetry.c is not None:
            d = symmetry.bracket_closure_defect(S.symmetry, pts)
            result["bracket_closure_defect"] = d
            ok &= d < claims.BRACKET_TOL
    result["points"] = args.points
    emit(envelope("check", S.name, args.seed, cfg, ok, result), out)
    return EXIT_OK if ok else EXIT_FAIL


def _level(S, spec, rng):
    if S.symmetry is None:
        raise InputError("system has no symmetry block")
    if spec is None:
        if not S.levels:
            raise InputError("no --level given and the system declares no levels")
        return S.levels[0]
    if spec.startswith("@"):
        seed = np.array(_floats(spec[1:], "--level"))
        if seed.shape != (S.n,):
            raise InputError(f"--level: expected {S.n} coordinates after @")
        mu = None if S.symmetry.differential_only else S.symmetry.momentum_values(seed)
        return LevelSpec(mu, seed)
    if S.symmetry.differential_only:
        raise InputError("differential-only momentum: give the level as @point")
    mu = np.array(_floats(spec, "--level"))
    if mu.size != S.k * S.symmetry.g:
        raise InputError(f"--level: expected {S.k * S.symmetry.g} momentum values")
    start = S.levels[0].seed if S.levels else S.sample_points(1, rng)[0]
    return LevelSpec(mu.reshape(S.k, S.symmetry.g), start)


def cmd_reduce(args, cfg, out):
    S = load_system(args.file)
    rng = np.random.default_rng(args.seed)
    lv = _level(S, args.level, rng)
    P, G = S.structure, S.symmetry
    if G.differential_only:
        pts = [lv.seed] + S.sample_points(args.points - 1, rng)
    else:
        pts = symmetry.sample_level_set(P, G, lv, args.points, rng, accept=S.in_domain, cfg=cfg)
    rep = reduction.reduction_report(P, G, pts, cfg)
    regular = symmetry.weak_regularity_probe(P, G, pts, cfg)
    result = {"level": lv.as_dict(), "weak_regularity": regular.as_dict(), "reduction": rep.as_dict(),
              "assumptions": {"quotientable": G.quotientable}}
    if not G.differential_only and G.c is not None:
        cc = symmetry.infinitesimal_cocycle_check(P, G, pts)
        result["cocycle"] = cc.as_dict()
        if not cc.equivariant:
            result["notes"] = ["nonzero cocycle: isotropy is the infinitesimal kernel surrogate, "
                               "not the cocycle-modified action"]
    if S.hamiltonian is not None or S.vector_field is not None:
        result["dynamics"] = reduction.dynamics_reduction_check(P, G, S.hamiltonian, pts,
                                                                field=S.vector_field).as_dict()
    ok = rep.blacker and rep.consistent
    emit(envelope("reduce", S.name, args.seed, cfg, ok, result), out)
    return EXIT_OK if ok else EXIT_FAIL


def parse_grid(spec, S, rng):
    """``N`` random box points, or ``name=lo:hi:count;...`` with the rest at box centres."""
    spec = spec.strip()
    if spec.isdigit():
        return S.sample_points(int(spec), rng)
    axes = []
    for part in spec.split(";"):
        name, sep, rng_text = part.partition("=")
        name = name.strip()
        idx = S.coordinates.index(name) if name in S.coordinates else None
        if idx is None and name.startswith("x") and name[1:].isdigit():
            idx = int(name[1:]) - 1
        if not sep or idx is None or not 0 <= idx < S.n:
            raise InputError(f"--grid: bad axis {part!r}")
        try:
            lo, hi, cnt = rng_text.split(":")
            axes.append((idx, np.linspace(float(lo), float(hi), int(cnt))))
        except ValueError:
            raise InputError(f"--grid: expected lo:hi:count in {part!r}") from None
    base = S.box.mean(axis=1)
    pts = [base]
    for idx, vals in axes:
        nxt = []
        for p in pts:
            for v in vals:
                q = p.copy()
                q[idx] = v
                nxt.append(q)
        pts = nxt
    return [p for p in pts if S.in_domain(p)]


def cmd_equilibria(args, cfg, out):
    S = load_system(args.file)
    if S.symmetry is None:
        raise InputError("system has no symmetry block")
    rng = np.random.default_rng(args.seed)
    if args.seeds:
        try:
            with open(args.seeds, encoding="utf-8") as fh:
                seeds = [np.array(s, dtype=float) for s in json.load(fh)]
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise InputError(f"{args.seeds}: {exc}") from None
    elif args.grid:
        seeds = parse_grid(args.grid, S, rng)
    else:
        seeds = S.seeds or S.sample_points(10, rng)
    if any(s.shape != (S.n,) for s in seeds):
        raise InputError(f"seeds must have {S.n} coordinates")
    found = eqm.find_relative_equilibria(S.structure, S.symmetry, S.hamiltonian, seeds,
                                         vector_field=S.vector_field, cfg=cfg, accept=S.in_domain)
    items = []
    for e in found.equilibria:
        d = {"equilibrium": e.as_dict()}
        if args.classify:
            if S.hamiltonian is None:
                raise InputError("--classify needs a Hamiltonian")
            d["stability"] = eqm.classify_formal_stability(S.structure, S.symmetry, S.hamiltonian, e, cfg).as_dict()
            dfn, spec = eqm.reduced_minimum_check(S.structure, S.symmetry, S.hamiltonian, e, cfg)
            d["reduced_minimum"] = {"verdict": dfn.value, "spectrum": spec}
            d["gauge"] = eqm.gauge_degeneracy_check(S.structure, S.symmetry, S.hamiltonian, e, cfg).as_dict()
        items.append(d)
    result = {"seeds": len(seeds), "equilibria": items,
              "failures": [{"seed": s, "message": m} for s, m in found.failures]}
    ok = bool(items)
    emit(envelope("equilibria", S.name, args.seed, cfg, ok, result), out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args, cfg, out):
    S = load_system(args.file)
    ic = np.array(_floats(args.ic, "--ic"))
    if ic.shape != (S.n,):
        raise InputError(f"--ic: expected {S.n} coordinates")
    if args.method == "rk4" and args.dt is not None and args.dt <= 0:
        raise InputError("--dt must be positive")
    try:
        traj = dyn.integrate(S.field(), ic, args.t, method=args.method, dt=args.dt, domain=S.domain)
    except (dyn.DomainExit, dyn.StepUnderflow) as exc:
        sys.stderr.write(f"psmech: {exc}\n")
        return EXIT_FAIL
    text = traj.to_csv()
    ok = True
    if args.conserve:
        G = S.symmetry if S.symmetry is not None and not S.symmetry.differential_only else None
        rep = dyn.conservation_check(traj, S.hamiltonian, G)
        ok = rep.passed
        lines = [f"# drift {k} {v:.6e}" for k, v in rep.drifts.items()]
        lines.append(f"# conservation {'pass' if ok else 'fail'} tol {dyn.DRIFT_TOL:g}")
        text += "\n".join(lines) + "\n"
    out.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def _resolve(target, params):
    if os.path.exists(target) or target.endswith(".json"):
        if params:
            raise InputError("--param applies to catalog ids, not files")
        return load_system(target)
    try:
        return catalog.load(target, **params)
    except catalog.UnknownEntry:
        raise InputError(f"unknown catalog id {target!r} (see 'catalog list')") from None
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


def summary(rep):
    out = {}
    for r in rep.results:
        out.setdefault(r.kind, r.actual)
    return out


def cmd_catalog(args, cfg, out):
    if args.action == "list":
        emit({"schema": REPORT_SCHEMA, "tool": "psmech", "version": __version__, "command": "catalog list",
              "entries": catalog.describe()}, out)
        return EXIT_OK
    if not args.id:
        raise InputError(f"catalog {args.action} needs an id")
    params = parse_params(args.param)
    if args.action == "export":
        try:
            doc = catalog.document(args.id, **params)
        except catalog.UnknownEntry:
            raise InputError(f"unknown catalog id {args.id!r}") from None
        except (TypeError, ValueError) as exc:
            raise InputError(str(exc)) from None
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    S = _resolve(args.id, params)
    rep = claims.run_claims(S, args.seed, cfg)
    result = {**rep.as_dict(), "summary": summary(rep)}
    if "catalog" in S.doc:
        result["catalog"] = S.doc["catalog"]
    emit(envelope("catalog run", S.name, args.seed, cfg, rep.passed, result), out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="psmech", description="k-polysymplectic reduction and stability toolkit")
    p.add_argument("--version", action="version", version=f"psmech {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        return sp

    c = seeded(sub.add_parser("check", help="verify the structure and momentum map"))
    c.add_argument("file")
    c.add_argument("--points", type=int, default=50)
    c.set_defaults(fn=cmd_check)

    r = seeded(sub.add_parser("reduce", help="reduction conditions on a momentum level"))
    r.add_argument("file")
    r.add_argument("--level", help="momentum values (comma separated) or @point")
    r.add_argument("--points", type=int, default=20)
    r.set_defaults(fn=cmd_reduce)

    e = seeded(sub.add_parser("equilibria", help="search relative equilibria"))
    e.add_argument("file")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--grid", help="N, or name=lo:hi:count;... (other coordinates at box centres)")
    g.add_argument("--seeds", help="JSON file with a list of seed points")
    e.add_argument("--classify", action="store_true", help="add formal stability reports")
    e.set_defaults(fn=cmd_equilibria)

    s = seeded(sub.add_parser("simulate", help="integrate the dynamics, CSV to stdout"))
    s.add_argument("file")
    s.add_argument("--ic", required=True, help="initial point, comma separated")
    s.add_argument("--t", type=float, required=True, help="final time")
    s.add_argument("--method", choices=["rk45", "rk4"], default="rk45")
    s.add_argument("--dt", type=float, help="rk4 step")
    s.add_argument("--conserve", action="store_true", help="append a drift summary")
    s.set_defaults(fn=cmd_simulate)

    k = seeded(sub.add_parser("catalog", help="built-in example systems"))
    k.add_argument("action", choices=["list", "run", "export"])
    k.add_argument("id", nargs="?", help="catalog id (run also accepts a system file)")
    k.add_argument("--param", nargs="+", metavar="KEY=VALUE", help="entry parameters, JSON values")
    k.set_defaults(fn=cmd_catalog)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = ToleranceConfig.from_env()
        for name in ("points",):
            if getattr(args, name, 1) < 1:
                raise InputError(f"--{name} must be positive")
        return args.fn(args, cfg, out)
    except (InputError, SystemFileError, ExprError, ValueError) as exc:
        sys.stderr.write(f"psmech: error: {exc}\n")
        return EXIT_INPUT
    except (DomainError, NotOnLevel, RuntimeError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"psmech: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
