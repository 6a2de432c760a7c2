"""Evaluate the expected-results claims attached to a system document."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn
from . import equilibrium as eqm
from . import reduction as red
from . import subspace as sub
from . import symmetry as sym
from .expr import ScalarField, VectorFieldExpr
from .geometry import KFunction, hamiltonian_field_at, is_hamiltonian_field, verify_structure, derivation_check
from .subspace import DEFAULT, ToleranceConfig
from .system import Predicate, System

LEVEL_POINTS = 20
DOMAIN_POINTS = 50
RANDOM_POINTS = 50
FIELD_TOL = 1e-8
VALUE_TOL = 1e-9
SPECTRUM_TOL = 1e-6
BRACKET_TOL = 1e-8
INVARIANCE_TOL = 1e-6
FRAME_TOL = 1e-6
EQ_TOL = 1e-8


@dataclass
class ClaimResult:
    id: str
    kind: str
    passed: bool
    expected: object
    actual: object
    source: str = ""
    note: str = ""
    error: str | None = None
    details: dict | None = None

    def as_dict(self):
        return {k: v for k, v in vars(self).items() if v is not None or k in ("actual", "expected")}


@dataclass
class ClaimsReport:
    system: str
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self):
        return {"system": self.system, "passed": self.passed,
                "counts": {"total": len(self.results), "failed": sum(not r.passed for r in self.results)},
                "claims": [r.as_dict() for r in self.results]}


def _plain(x):
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def matches(expected, actual, rtol=1e-6, atol=1e-9) -> bool:
    """Structural comparison: dicts by expected keys, numbers within tolerance."""
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(k in actual and matches(v, actual[k], rtol, atol)
                                                for k, v in expected.items())
    if isinstance(expected, (list, tuple)):
        return (isinstance(actual, (list, tuple)) and len(expected) == len(actual)
                and all(matches(e, a, rtol, atol) for e, a in zip(expected, actual)))
    if isinstance(expected, bool) or isinstance(actual, bool):
        return expected is actual or expected == actual and type(expected) is type(actual)
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        return abs(expected - actual) <= atol + rtol * abs(expected)
    return expected == actual


class Context:
    """Shared, lazily computed samples for one system and one seed."""

    def __init__(self, system: System, seed=0, cfg: ToleranceConfig = DEFAULT):
        self.system = system
        self.seed = int(seed)
        self.cfg = cfg
        self._cache = {}

    def rng(self, tag: str):
        return np.random.default_rng([self.seed, zlib.crc32(tag.encode())])

    def _cached(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @property
    def P(self):
        return self.system.structure

    @property
    def S(self):
        if self.system.symmetry is None:
            raise ValueError("system has no symmetry block")
        return self.system.symmetry

    @property
    def h(self):
        return self.system.hamiltonian

    def domain_points(self, count=DOMAIN_POINTS):
        return self._cached(("domain", count), lambda: self.system.sample_points(count, self.rng(f"domain{count}")))

    def level_points(self, count=LEVEL_POINTS):
        return self._cached(("level", count), lambda: self.system.sample_level(count, self.rng(f"level{count}")))

    def scalar(self, text):
        s = self.system
        return ScalarField(text, s.n, s.params, s.aliases)

    def vfield(self, comps):
        s = self.system
        return VectorFieldExpr([str(c) for c in comps], s.n, s.params, s.aliases)

    def kfunction(self, comps):
        return KFunction([self.scalar(str(c)) for c in comps])

    def vectors_at(self, vecs, p):
        """Numeric rows, or expression rows evaluated at p."""
        out = []
        for v in vecs:
            if all(isinstance(c, (int, float)) for c in v):
                out.append(np.asarray(v, dtype=float))
            else:
                out.append(self.vfield(v).value(p))
        return out

    def field(self):
        return self._cached("field", self.system.field)

    def equilibria(self):
        return self._cached("equilibria", self._find_equilibria)

    def _find_equilibria(self):
        s = self.system
        X = s.vector_field
        found = eqm.find_relative_equilibria(self.P, self.S, self.h, s.seeds, vector_field=X, cfg=self.cfg,
                                             accept=s.in_domain)
        eqs = list(found.equilibria)
        for z in s.doc.get("family") or []:
            e = eqm.relative_equilibrium_at(self.P, self.S, self.h, z, vector_field=X, cfg=self.cfg)
            if e.accepted:
                eqs.append(e)
        return eqs, found.failures


def _alpha(a):
    return "joint" if a in (None, "joint") else int(a) - 1


# ---------------------------------------------------------------------------
# claim kinds: each returns (passed, actual)

HANDLERS = {}


def handler(name):
    def deco(fn):
        HANDLERS[name] = fn
        return fn
    return deco


def _eq(expected, actual):
    return matches(expected, actual), actual


@handler("structure_valid")
def _structure(ctx, expected):
    rep = verify_structure(ctx.P, ctx.domain_points(), ctx.cfg)
    worst = max(rep.points, key=lambda c: max(c.skew_defect, c.closure_defect))
    return _eq(expected, rep.passed) + ({"skew": worst.skew_defect, "closure": worst.closure_defect},)


@handler("value")
def _value(ctx, expected, expr, at):
    v = ctx.scalar(expr).value(np.asarray(at, float))
    return abs(v - expected) <= VALUE_TOL * (1 + abs(expected)), v


@handler("hamiltonian_solve")
def _hsolve(ctx, expected, field, hamiltonian=None):
    h = ctx.kfunction(hamiltonian) if hamiltonian is not None else ctx.h
    X = ctx.vfield(field)
    worst = 0.0
    for p in ctx.domain_points(LEVEL_POINTS):
        sol = hamiltonian_field_at(ctx.P, h, p)
        ref = X.value(p)
        err = float(np.max(np.abs(sol.X - ref)) / (1.0 + np.max(np.abs(ref))))
        worst = max(worst, err if sol.accepted else math.inf)
    ok = worst < FIELD_TOL
    return ok == expected, ok, {"max_relative_error": worst}


@handler("is_hamiltonian_field")
def _is_ham(ctx, expected, field):
    verdicts, defects = is_hamiltonian_field(ctx.P, ctx.vfield(field), ctx.domain_points(LEVEL_POINTS))
    return matches(expected, verdicts), verdicts, {"defects": defects}


@handler("derivation")
def _derivation(ctx, expected, f, h=None):
    hh = ctx.kfunction(h) if h is not None else ctx.h
    worst, ok = derivation_check(ctx.P, hh, ctx.kfunction(f), ctx.domain_points(LEVEL_POINTS))
    return ok == expected, ok, {"defect": worst}


@handler("kernel")
def _kernel(ctx, expected, alpha):
    a = int(alpha) - 1
    ok, dims = True, set()
    for p in ctx.domain_points(LEVEL_POINTS):
        K = ctx.P.kernel(a, p, ctx.cfg)
        E = sub.span(ctx.vectors_at(expected, p), ctx.system.n, ctx.cfg) if expected else sub.zero(ctx.system.n)
        dims.add(K.dim)
        ok &= sub.equals(K, E, ctx.cfg)
    return ok, {"equal": ok, "dims": sorted(dims)}


@handler("momentum_valid")
def _momentum(ctx, expected):
    rep = sym.verify_momentum(ctx.P, ctx.S, ctx.domain_points())
    return rep.passed == expected, rep.passed, rep.as_dict()


@handler("invariance")
def _invariance(ctx, expected):
    pts = ctx.domain_points(LEVEL_POINTS)
    d = sym.invariance_defect(ctx.P, ctx.S, pts)
    hd = 0.0
    if ctx.h is not None:
        for p in pts:
            hd = max(hd, float(np.max(np.abs(ctx.h.grads(p) @ ctx.S.generator_matrix(p, ctx.P.n)))))
    ok = d < INVARIANCE_TOL and hd < INVARIANCE_TOL
    return ok == expected, ok, {"form_defect": d, "hamiltonian_defect": hd}


@handler("bracket_closure")
def _brackets(ctx, expected):
    d = sym.bracket_closure_defect(ctx.S, ctx.domain_points(LEVEL_POINTS))
    return (d < BRACKET_TOL) == expected, d < BRACKET_TOL, {"defect": d}


@handler("cocycle")
def _cocycle(ctx, expected):
    rep = sym.infinitesimal_cocycle_check(ctx.P, ctx.S, ctx.domain_points(LEVEL_POINTS))
    return _eq(expected, rep.as_dict())


def _each_level(ctx, fn):
    return [fn(p) for p in ctx.level_points()]


@handler("level_tangent")
def _level_tangent(ctx, expected):
    n = ctx.system.n
    oks = _each_level(ctx, lambda p: sub.equals(sym.level_tangent(ctx.P, ctx.S, p, ctx.cfg),
                                                sub.span(ctx.vectors_at(expected, p), n, ctx.cfg), ctx.cfg))
    return all(oks), {"equal": all(oks), "points": len(oks)}


@handler("level_dim")
def _level_dim(ctx, expected):
    dims = sorted(set(_each_level(ctx, lambda p: sym.level_tangent(ctx.P, ctx.S, p, ctx.cfg).dim)))
    return dims == [expected], dims[0] if len(dims) == 1 else dims


@handler("orbit_tangent")
def _orbit(ctx, expected):
    n = ctx.system.n
    oks = _each_level(ctx, lambda p: sub.equals(sym.orbit_tangent(ctx.S, p, n, ctx.cfg),
                                                sub.span(ctx.vectors_at(expected, p), n, ctx.cfg), ctx.cfg))
    return all(oks), {"equal": all(oks), "points": len(oks)}


@handler("isotropy_dim")
def _isotropy(ctx, expected, alpha="joint"):
    a = _alpha(alpha)
    dims = sorted(set(_each_level(ctx, lambda p: sym.isotropy_algebra(ctx.P, ctx.S, p, a, ctx.cfg).dim)))
    return dims == [expected], dims[0] if len(dims) == 1 else dims


@handler("weak_regularity")
def _weak(ctx, expected, points=None):
    pts = [np.asarray(p, float) for p in points] if points else ctx.level_points()
    rep = sym.weak_regularity_probe(ctx.P, ctx.S, pts, ctx.cfg)
    return _eq(expected, _plain(rep.as_dict()))


@handler("momentum_rank")
def _mrank(ctx, expected, at):
    dJ = sym.momentum_differentials(ctx.P, ctx.S, np.asarray(at, float))
    r = sub.rank(dJ.reshape(-1, ctx.P.n), ctx.cfg)
    return r == expected, r


@handler("lemma")
def _lemma(ctx, expected):
    res = _each_level(ctx, lambda p: sym.lemma_identities(ctx.P, ctx.S, p, ctx.cfg))
    ok = [all(r[0][0] for r in res), all(r[0][1] for r in res)]
    worst = [max(r[1][0] for r in res), max(r[1][1] for r in res)]
    return matches(expected, ok), ok, {"max_residuals": worst}


def _reduction(ctx):
    return ctx._cached("reduction", lambda: red.reduction_report(ctx.P, ctx.S, ctx.level_points(), ctx.cfg))


@handler("condition_A")
def _cond_a(ctx, expected):
    return _eq(expected, _reduction(ctx).condition_A)


@handler("condition_B")
def _cond_b(ctx, expected):
    return _eq(expected, _reduction(ctx).condition_B)


@handler("blacker")
def _blacker(ctx, expected):
    rep = _reduction(ctx)
    return expected == rep.blacker and rep.consistent, rep.blacker, {"consistent_with_kernel": rep.consistent}


@handler("reduced_ranks")
def _ranks(ctx, expected):
    seen = []
    for q in _reduction(ctx).points:
        d = {"reduced_dim": q.reduced_dim, "ranks": q.reduced_ranks, "joint_kernel_dim": q.reduced_joint_kernel_dim}
        if d not in seen:
            seen.append(d)
    return seen == [expected], seen[0] if len(seen) == 1 else seen


@handler("frame_independent")
def _frame(ctx, expected, fields, criterion="det"):
    """criterion "det": |det| / prod|columns| > FRAME_TOL; "rank": full SVD rank."""
    worst, full = math.inf, True
    for p in ctx.domain_points(LEVEL_POINTS):
        M = np.column_stack(ctx.vectors_at(fields, p))
        scale = float(np.prod(np.linalg.norm(M, axis=0)))
        worst = min(worst, abs(float(np.linalg.det(M))) / scale if scale > 0 else 0.0)
        full &= sub.rank(M, ctx.cfg) == M.shape[0]
    ok = worst > FRAME_TOL if criterion == "det" else full
    return ok == expected, ok, {"min_normalized_det": worst, "full_rank": full, "criterion": criterion}


@handler("equilibria")
def _equilibria(ctx, expected, constraints, xi=None, tol=EQ_TOL):
    eqs, failures = ctx.equilibria()
    cons = [ctx.scalar(c) for c in constraints]
    xis = [ctx.scalar(str(e)) for e in xi] if xi is not None else None
    worst_c = worst_xi = 0.0
    for e in eqs:
        worst_c = max([worst_c] + [abs(c.value(e.z)) for c in cons])
        if xis is not None:
            ref = np.array([x.value(e.z) for x in xis])
            worst_xi = max(worst_xi, float(np.max(np.abs(e.xi - ref), initial=0.0)))
    ok = bool(eqs) and all(e.accepted for e in eqs) and worst_c < tol and worst_xi < tol
    return ok == expected, ok, {"count": len(eqs), "seed_failures": len(failures),
                                 "max_constraint": worst_c, "max_xi_error": worst_xi,
                                 "max_residual": max((e.residual for e in eqs), default=None)}


def _need_eqs(ctx):
    eqs, _ = ctx.equilibria()
    if not eqs:
        raise ValueError("no accepted relative equilibria")
    return eqs


@handler("classification")
def _classification(ctx, expected):
    verdicts = [eqm.classify_formal_stability(ctx.P, ctx.S, ctx.h, e, ctx.cfg).classification.value
                for e in _need_eqs(ctx)]
    got = sorted(set(verdicts))
    return got == [expected], got[0] if len(got) == 1 else got


@handler("spectra")
def _spectra(ctx, expected, alpha):
    a = int(alpha) - 1
    seen, ok = [], True
    for e in _need_eqs(ctx):
        spec = sorted(eqm.classify_formal_stability(ctx.P, ctx.S, ctx.h, e, ctx.cfg).blocks[a].spectrum)
        ok &= matches(sorted(expected), spec, rtol=SPECTRUM_TOL, atol=SPECTRUM_TOL)
        seen.append(spec)
    return ok, seen[0] if ok else seen


@handler("reduced_minimum")
def _redmin(ctx, expected):
    got = sorted({eqm.reduced_minimum_check(ctx.P, ctx.S, ctx.h, e, ctx.cfg)[0].value for e in _need_eqs(ctx)})
    return got == [expected], got[0] if len(got) == 1 else got


@handler("gauge")
def _gauge(ctx, expected):
    reps = [eqm.gauge_degeneracy_check(ctx.P, ctx.S, ctx.h, e, ctx.cfg) for e in _need_eqs(ctx)]
    ok = all(r.passed for r in reps)
    return ok == expected, ok, {"isotropy_clause": max(r.isotropy_defect for r in reps),
                                 "kernel_clause": max(r.kernel_defect for r in reps)}


@handler("theorem_equivalence")
def _equiv(ctx, expected):
    X = ctx.system.vector_field
    at_eq = [eqm.theorem_equivalence(ctx.P, ctx.S, ctx.h, e.z, X) for e in _need_eqs(ctx)]
    rand = [eqm.theorem_equivalence(ctx.P, ctx.S, ctx.h, p, X)
            for p in ctx.system.sample_points(RANDOM_POINTS, ctx.rng("equivalence"))]
    ok = all(c.agree and c.residual_zero for c in at_eq) and all(c.agree for c in rand)
    return ok == expected, ok, {"equilibria": len(at_eq), "random_points": len(rand),
                                 "random_equilibria": sum(c.residual_zero for c in rand)}


@handler("h_xi_gradient")
def _hxi(ctx, expected, at, xi):
    G = eqm.h_xi_gradients(ctx.P, ctx.S, ctx.h, np.asarray(at, float), xi)
    return matches(expected, G.tolist(), rtol=0, atol=VALUE_TOL), G.tolist()


@handler("dynamics_reduction")
def _dynred(ctx, expected):
    field = ctx.system.vector_field
    rep = red.dynamics_reduction_check(ctx.P, ctx.S, ctx.h, ctx.level_points(), field=field)
    return rep.passed == expected, rep.passed, rep.as_dict()


def reduced_system(system: System):
    """(vector field, domain predicates, parameters, aliases) of the declared reduced system."""
    r = system.reduced
    if not r:
        raise ValueError("system declares no reduced system")
    coords = r["coordinates"]
    m = len(coords)
    params = {str(k): float(v) for k, v in (r.get("parameters") or {}).items()}
    aliases = {c: i for i, c in enumerate(coords)}
    X = VectorFieldExpr(r["vector_field"], m, params, aliases)
    dom = [Predicate(t, m, params, aliases) for t in r.get("domain") or []]
    return X, dom, params, aliases


@handler("lyapunov")
def _lyapunov(ctx, expected, M, center, radius, samples, system="reduced"):
    if system == "reduced":
        X, _, params, aliases = reduced_system(ctx.system)
        Mf = ScalarField(M, len(center), params, aliases)
    else:
        X, Mf = ctx.field(), ctx.scalar(M)
    rep = dyn.lyapunov_test(X, dyn.LyapunovCandidate(Mf, np.asarray(center, float)), radius, samples,
                            ctx.rng("lyapunov"))
    return rep.passed == expected, rep.passed, rep.as_dict()


@handler("empirical_stability")
def _empirical(ctx, expected, center, eps, delta, T, samples, system="reduced"):
    if system == "reduced":
        X, dom, _, _ = reduced_system(ctx.system)
        mon = None
    else:
        X, dom = ctx.field(), ctx.system.domain
        m = ctx.system.monitors
        mon = (lambda x: np.array([f.value(x) for f in m])) if m else None
    rep = dyn.empirical_stability(X, center, eps, delta, T, samples, ctx.rng("empirical"), monitors=mon,
                                  domain=dom)
    return rep.verdict == expected, rep.verdict, _plain(rep.as_dict())


@handler("conservation")
def _conservation(ctx, expected, ic, T):
    traj = dyn.integrate(ctx.field(), ic, T, domain=ctx.system.domain)
    S = ctx.system.symmetry
    rep = dyn.conservation_check(traj, ctx.h, S if S is not None and not S.differential_only else None)
    return rep.passed == expected, rep.passed, rep.as_dict()


# ---------------------------------------------------------------------------

def evaluate_claim(ctx: Context, claim: dict) -> ClaimResult:
    kind = claim.get("kind")
    expected = claim.get("expected")
    res = ClaimResult(claim.get("id", kind), kind, False, expected, None,
                      claim.get("source", ""), claim.get("note", ""))
    fn = HANDLERS.get(kind)
    if fn is None:
        res.error = f"unknown claim kind {kind!r}"
        return res
    try:
        out = fn(ctx, expected, **(claim.get("args") or {}))
    except Exception as exc:  # a claim that cannot be evaluated fails, with the reason
        res.error = f"{type(exc).__name__}: {exc}"
        return res
    res.passed = bool(out[0])
    res.actual = _plain(out[1])
    if len(out) > 2:
        res.details = _plain(out[2])
    return res


def run_claims(system: System, seed=0, cfg: ToleranceConfig = DEFAULT, only=None) -> ClaimsReport:
    ctx = Context(system, seed, cfg)
    rep = ClaimsReport(system.name)
    for c in system.claims:
        if only is None or c.get("id") in only or c.get("kind") in only:
            rep.results.append(evaluate_claim(ctx, c))
    return rep
