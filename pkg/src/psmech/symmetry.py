"""Infinitesimal symmetries: generators, momentum maps, orbits, isotropy and levels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .geometry import PolySymplecticStructure, closedness_defect, contraction_differential
from .subspace import DEFAULT, ToleranceConfig

MOMENTUM_TOL = 1e-6
COCYCLE_TOL = 1e-6
LEVEL_TOL = 1e-10
LEVEL_MAXIT = 50


class NotOnLevel(ValueError):
    pass


class SymmetryModel:
    """g fundamental vector fields with an explicit or differential-only momentum map.

    ``momentum`` is a k x g nested list of scalar fields J^a_i, or ``None``
    for the differential-only mode where dJ^a_i is taken to be i_{xi_i} omega^a.
    ``structure_constants[l, i, j]`` follow [xi_i, xi_j] = c^l_ij xi_l for
    the vector field bracket.
    """

    def __init__(self, generators, momentum=None, structure_constants=None,
                 isotropy_override=None, quotientable=True):
        self.generators = list(generators)
        self.g = len(self.generators)
        self.momentum = None if momentum is None else [list(row) for row in momentum]
        if self.momentum is not None and any(len(r) != self.g for r in self.momentum):
            raise ValueError(f"momentum rows must have {self.g} components")
        self.c = None if structure_constants is None else np.asarray(structure_constants, float)
        if self.c is not None and self.c.shape != (self.g,) * 3:
            raise ValueError(f"structure constants must have shape {(self.g,) * 3}")
        self.isotropy_override = dict(isotropy_override or {})
        self.quotientable = quotientable

    @property
    def differential_only(self) -> bool:
        return self.momentum is None

    def generator_matrix(self, p, n=None) -> np.ndarray:
        if not self.generators:
            return np.zeros((n or len(p), 0))
        return np.column_stack([xi.value(p) for xi in self.generators])

    def momentum_values(self, p):
        if self.momentum is None:
            return None
        return np.array([[J.value(p) for J in row] for row in self.momentum])


@dataclass
class LevelSpec:
    mu: np.ndarray | None  # k x g; None in differential-only mode
    seed: np.ndarray

    def as_dict(self):
        return {"mu": None if self.mu is None else np.asarray(self.mu).tolist(),
                "seed": np.asarray(self.seed).tolist()}


def momentum_differentials(P: PolySymplecticStructure, S: SymmetryModel, p) -> np.ndarray:
    """Array (k, g, n) of dJ^a_i(p)."""
    if S.g == 0:
        return np.zeros((P.k, 0, P.n))
    if S.momentum is not None:
        return np.array([[J.grad(p) for J in row] for row in S.momentum]).reshape(P.k, S.g, P.n)
    Xi = S.generator_matrix(p)
    return np.array([(A.T @ Xi).T for A in P.matrices(p)])


def momentum_hessians(P: PolySymplecticStructure, S: SymmetryModel, p) -> np.ndarray:
    """Array (k, g, n, n) of second derivatives of J^a_i."""
    out = np.zeros((P.k, S.g, P.n, P.n))
    if S.momentum is not None:
        for a, row in enumerate(S.momentum):
            for i, J in enumerate(row):
                out[a, i] = J.hessian(p)
        return out
    mats, ders = P.matrices(p), P.derivatives(p)
    for i, xi in enumerate(S.generators):
        X, JX = xi.value(p), xi.jacobian(p)
        for a in range(P.k):
            dC = contraction_differential(mats[a], ders[a], X, JX)
            out[a, i] = 0.5 * (dC + dC.T)
    return out


def _rows(P, S, p):
    return momentum_differentials(P, S, p).reshape(-1, P.n)


# ---------------------------------------------------------------------------
# verification

@dataclass
class MomentumReport:
    mode: str
    defects: list  # k x g
    passed: bool

    def as_dict(self):
        return {"mode": self.mode, "defects": self.defects, "passed": self.passed}


def verify_momentum(P: PolySymplecticStructure, S: SymmetryModel, points, tol=MOMENTUM_TOL):
    """Check i_{xi_i} omega^a = dJ^a_i (explicit) or closedness (differential-only)."""
    D = np.zeros((P.k, S.g))
    for p in points:
        p = np.asarray(p, dtype=float)
        mats = P.matrices(p)
        if S.momentum is not None:
            Xi = S.generator_matrix(p, P.n)
            dJ = momentum_differentials(P, S, p)
            for a, A in enumerate(mats):
                D[a] = np.maximum(D[a], np.max(np.abs((A.T @ Xi).T - dJ[a]), axis=1) if S.g else 0)
        else:
            ders = P.derivatives(p)
            for i, xi in enumerate(S.generators):
                X, JX = xi.value(p), xi.jacobian(p)
                for a in range(P.k):
                    D[a, i] = max(D[a, i], closedness_defect(mats[a], ders[a], X, JX))
    mode = "differential" if S.momentum is None else "explicit"
    return MomentumReport(mode, D.tolist(), bool(np.all(D < tol)))


def invariance_defect(P: PolySymplecticStructure, S: SymmetryModel, points) -> float:
    """Largest relative entry of the Lie derivative L_{xi_i} A^a."""
    worst = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        mats, ders = P.matrices(p), P.derivatives(p)
        for xi in S.generators:
            X, JX = xi.value(p), xi.jacobian(p)
            for A, D in zip(mats, ders):
                L = np.einsum("abc,c->ab", D, X) + JX.T @ A + A @ JX
                scale = max(1.0, float(np.max(np.abs(A))), float(np.max(np.abs(D))) * float(np.max(np.abs(X))))
                worst = max(worst, float(np.max(np.abs(L))) / scale)
    return worst


def bracket_closure_defect(S: SymmetryModel, points) -> float:
    """max |[xi_i, xi_j] - c^l_ij xi_l| over sample points."""
    if S.c is None:
        raise ValueError("structure constants not supplied")
    worst = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        vals = [xi.value(p) for xi in S.generators]
        jacs = [xi.jacobian(p) for xi in S.generators]
        Xi = np.column_stack(vals) if vals else np.zeros((len(p), 0))
        for i in range(S.g):
            for j in range(S.g):
                br = jacs[j] @ vals[i] - jacs[i] @ vals[j]
                worst = max(worst, float(np.max(np.abs(br - Xi @ S.c[:, i, j]))))
    return worst


@dataclass
class CocycleReport:
    gradient_defect: np.ndarray  # (k, g, g)
    value_defect: np.ndarray  # (k, g, g)
    passed: bool
    equivariant: bool

    def as_dict(self):
        return {"max_gradient_defect": float(self.gradient_defect.max(initial=0.0)),
                "max_value": float(self.value_defect.max(initial=0.0)),
                "passed": self.passed, "equivariant": self.equivariant}


def infinitesimal_cocycle_check(P: PolySymplecticStructure, S: SymmetryModel, points,
                                tol=COCYCLE_TOL) -> CocycleReport:
    """Constancy of xi_i(J^a_j) - c^l_ij J^a_l on the sample points.

    With c the vector field bracket constants, i_[xi_i, xi_j] omega = d(xi_i J_j),
    so this combination is the one whose differential vanishes.
    """
    if S.momentum is None or S.c is None:
        raise ValueError("cocycle check needs an explicit momentum map and structure constants")
    k, g = P.k, S.g
    grad_def = np.zeros((k, g, g))
    val_def = np.zeros((k, g, g))
    for p in points:
        p = np.asarray(p, dtype=float)
        vals = [xi.value(p) for xi in S.generators]
        jacs = [xi.jacobian(p) for xi in S.generators]
        Jv = S.momentum_values(p)
        dJ = momentum_differentials(P, S, p)
        HJ = momentum_hessians(P, S, p)
        for a in range(k):
            for i in range(g):
                for j in range(g):
                    val = dJ[a, j] @ vals[i] - S.c[:, i, j] @ Jv[a]
                    grd = jacs[i].T @ dJ[a, j] + HJ[a, j] @ vals[i] - np.tensordot(S.c[:, i, j], dJ[a], 1)
                    grad_def[a, i, j] = max(grad_def[a, i, j], float(np.linalg.norm(grd)))
                    val_def[a, i, j] = max(val_def[a, i, j], abs(float(val)))
    passed = bool(np.all(grad_def < tol))
    return CocycleReport(grad_def, val_def, passed, passed and bool(np.all(val_def < tol)))


# ---------------------------------------------------------------------------
# tangent spaces

def orbit_tangent(S: SymmetryModel, p, n=None, cfg: ToleranceConfig = DEFAULT) -> sub.SubspaceBasis:
    n = n or len(p)
    return sub.span(S.generator_matrix(p, n), n, cfg)


def level_tangent(P: PolySymplecticStructure, S: SymmetryModel, p, cfg: ToleranceConfig = DEFAULT):
    return sub.nullspace(_rows(P, S, p), P.n, cfg)


def alpha_level_kernel(P, S, p, alpha, cfg: ToleranceConfig = DEFAULT):
    """ker of the alpha block T_p J_alpha."""
    return sub.nullspace(momentum_differentials(P, S, p)[alpha], P.n, cfg)


def isotropy_matrix(P, S, p, alpha) -> np.ndarray:
    """M[j, i] = dJ^alpha_j(xi_i(p))."""
    return momentum_differentials(P, S, p)[alpha] @ S.generator_matrix(p, P.n)


def isotropy_algebra(P: PolySymplecticStructure, S: SymmetryModel, p, alpha="joint",
                     cfg: ToleranceConfig = DEFAULT) -> sub.SubspaceBasis:
    """Kernel of M^alpha in coefficient space R^g (stacked over alpha for "joint")."""
    if alpha in S.isotropy_override:
        idx = S.isotropy_override[alpha]
        return sub.span(np.eye(S.g)[:, list(idx)], S.g, cfg)
    if S.g == 0:
        return sub.zero(0, cfg)
    dJ = momentum_differentials(P, S, p)
    Xi = S.generator_matrix(p, P.n)
    rows = dJ if alpha == "joint" else dJ[alpha:alpha + 1]
    M = np.vstack([r @ Xi for r in rows])
    scale = float(np.max(np.abs(rows), initial=0.0)) * float(np.max(np.abs(Xi), initial=0.0))
    return sub.nullspace(M, S.g, cfg, scale=scale)


def isotropy_orbit(P, S, p, alpha="joint", cfg: ToleranceConfig = DEFAULT) -> sub.SubspaceBasis:
    """Tangent space to the isotropy orbit: the generators combined along the isotropy algebra."""
    K = isotropy_algebra(P, S, p, alpha, cfg)
    return sub.span(S.generator_matrix(p, P.n) @ K.B, P.n, cfg)


# ---------------------------------------------------------------------------
# level sets

def project_to_level(S: SymmetryModel, mu, p, tol=LEVEL_TOL, maxit=LEVEL_MAXIT) -> np.ndarray:
    """Gauss-Newton on J(p) = mu."""
    if S.momentum is None:
        raise ValueError("level projection needs an explicit momentum map")
    mu = np.asarray(mu, dtype=float).ravel()
    if mu.size != len(S.momentum) * S.g:
        raise ValueError(f"level has {mu.size} values, expected {len(S.momentum) * S.g}")
    p = np.asarray(p, dtype=float).copy()
    bound = tol * max(1.0, float(np.max(np.abs(mu)))) if mu.size else tol
    for _ in range(maxit + 1):
        r = S.momentum_values(p).ravel() - mu
        if r.size == 0 or np.max(np.abs(r)) < bound:
            return p
        G = np.array([[J.grad(p) for J in row] for row in S.momentum]).reshape(r.size, -1)
        step, *_ = np.linalg.lstsq(G, -r, rcond=None)
        p = p + step
    raise NotOnLevel(f"level projection did not converge (|J - mu| = {np.max(np.abs(r)):.3g})")


def sample_level_set(P, S, level: LevelSpec, count, rng, step=0.3, accept=None,
                     cfg: ToleranceConfig = DEFAULT, max_tries=None):
    """Random walk on J^{-1}(mu): tangent steps followed by Gauss-Newton projection.

    ``accept`` is an optional predicate (e.g. a domain check).  The seed point
    itself is always the first sample.
    """
    seed = project_to_level(S, level.mu, level.seed)
    out = [seed]
    cur = seed
    tries = 0
    max_tries = max_tries or 50 * count
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise NotOnLevel(f"only {len(out)} of {count} level samples accepted")
        T = level_tangent(P, S, cur, cfg)
        if T.dim == 0:
            break
        d = T.B @ rng.standard_normal(T.dim)
        d *= step * rng.uniform(0.2, 1.0) / max(np.linalg.norm(d), 1e-300)
        try:
            q = project_to_level(S, level.mu, cur + d)
        except (NotOnLevel, ArithmeticError):
            continue
        if accept is not None and not accept(q):
            continue
        out.append(q)
        cur = q
    return out


@dataclass
class RegularityReport:
    ranks: list
    rank: int | None
    level_dim: int | None
    constant_rank: bool
    codomain_exceeds_domain: bool
    regular: bool
    verdict: str
    notes: list = field(default_factory=list)

    def as_dict(self):
        return dict(vars(self))


def weak_regularity_probe(P, S, samples, cfg: ToleranceConfig = DEFAULT) -> RegularityReport:
    """Constant-rank probe of the stacked momentum differentials over ``samples``."""
    ranks = [sub.rank(_rows(P, S, np.asarray(p, float)), cfg) for p in samples]
    const = len(set(ranks)) == 1
    kg = P.k * S.g
    r = ranks[0] if const else None
    notes = []
    if kg > P.n:
        notes.append("no regular points: k * dim g exceeds the dimension")
    if const and r < kg:
        notes.append("momentum map is not a submersion at the sampled points")
    return RegularityReport(
        ranks=ranks, rank=r, level_dim=None if r is None else P.n - r,
        constant_rank=const, codomain_exceeds_domain=kg > P.n,
        regular=const and r == kg,
        verdict="WeaklyRegular" if const else "NotWeaklyRegular", notes=notes)


def lemma_identities(P, S, p, cfg: ToleranceConfig = DEFAULT):
    """Check T(G_mu p) = T(Gp) cap T(level) and T(level) = T(Gp)^{perp,k} at p.

    Returns ((ok1, ok2), (residual1, residual2)).
    """
    p = np.asarray(p, dtype=float)
    L = level_tangent(P, S, p, cfg)
    O = orbit_tangent(S, p, P.n, cfg)
    Omu = isotropy_orbit(P, S, p, "joint", cfg)
    lhs1, rhs1 = Omu, sub.intersect(O, L, cfg)
    rhs2 = sub.k_orth_complement(O, P.matrices(p), cfg)
    r1 = sub.equality_residual(lhs1, rhs1)
    r2 = sub.equality_residual(L, rhs2)
    return ((lhs1.dim == rhs1.dim and r1 < cfg.eq_tol, L.dim == rhs2.dim and r2 < cfg.eq_tol),
            (r1, r2))
