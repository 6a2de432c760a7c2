"""Pointwise reduction conditions, the Blacker condition and reduced-form ranks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .geometry import KFunction, PolySymplecticStructure, hamiltonian_field_at, hamiltonian_field_jacobian
from .subspace import DEFAULT, ToleranceConfig
from .symmetry import (SymmetryModel, alpha_level_kernel, isotropy_orbit, level_tangent,
                       momentum_differentials, orbit_tangent)

DYNAMICS_TOL = 1e-6


def check_condition_A(P: PolySymplecticStructure, S: SymmetryModel, p,
                      cfg: ToleranceConfig = DEFAULT) -> list:
    """Per alpha: ker T_pJ_alpha == T(level) + ker omega^alpha + T(G_mu_alpha p)."""
    p = np.asarray(p, dtype=float)
    L = level_tangent(P, S, p, cfg)
    out = []
    for a in range(P.k):
        lhs = alpha_level_kernel(P, S, p, a, cfg)
        rhs = sub.sum_all([L, P.kernel(a, p, cfg), isotropy_orbit(P, S, p, a, cfg)], P.n, cfg)
        out.append(sub.equals(lhs, rhs, cfg))
    return out


def condition_B_sides(P, S, p, cfg: ToleranceConfig = DEFAULT):
    p = np.asarray(p, dtype=float)
    L = level_tangent(P, S, p, cfg)
    parts = [sub.sum_(P.kernel(a, p, cfg), isotropy_orbit(P, S, p, a, cfg), cfg) for a in range(P.k)]
    rhs = sub.intersect(sub.intersect_all(parts, P.n, cfg), L, cfg)
    return isotropy_orbit(P, S, p, "joint", cfg), rhs


def check_condition_B(P, S, p, cfg: ToleranceConfig = DEFAULT) -> bool:
    """T(G_mu p) == cap_alpha (ker omega^alpha + T(G_mu_alpha p)) cap T(level)."""
    lhs, rhs = condition_B_sides(P, S, p, cfg)
    return sub.equals(lhs, rhs, cfg)


def check_blacker(P, S, p, cfg: ToleranceConfig = DEFAULT) -> bool:
    """T(G_mu p) == (T(Gp)^perp)^perp cap T(Gp)^perp, perp being the k-orthogonal complement."""
    p = np.asarray(p, dtype=float)
    mats = P.matrices(p)
    O = orbit_tangent(S, p, P.n, cfg)
    Operp = sub.k_orth_complement(O, mats, cfg)
    rhs = sub.intersect(sub.k_orth_complement(Operp, mats, cfg), Operp, cfg)
    return sub.equals(isotropy_orbit(P, S, p, "joint", cfg), rhs, cfg)


@dataclass
class ReducedRanks:
    level_dim: int
    orbit_dim: int
    reduced_dim: int
    ranks: list
    joint_kernel_dim: int
    matrices: list = field(default_factory=list, repr=False)


def quotient_basis(P, S, p, cfg: ToleranceConfig = DEFAULT):
    """Euclidean complement of the joint isotropy orbit inside the level tangent."""
    L = level_tangent(P, S, p, cfg)
    Omu = isotropy_orbit(P, S, p, "joint", cfg)
    return L, Omu, sub.orth_complement_within(Omu, L, cfg)


def reduced_structure_ranks(P, S, p, cfg: ToleranceConfig = DEFAULT) -> ReducedRanks:
    p = np.asarray(p, dtype=float)
    L, Omu, Q = quotient_basis(P, S, p, cfg)
    mats = P.matrices(p)
    red = [Q.B.T @ A @ Q.B for A in mats]
    scale = max((float(np.max(np.abs(A))) for A in mats), default=0.0)
    ranks = [sub.rank(R, cfg, scale) for R in red]
    if Q.dim:
        jk = sub.nullspace(np.vstack(red), Q.dim, cfg, scale).dim
    else:
        jk = 0
    return ReducedRanks(L.dim, Omu.dim, Q.dim, ranks, jk, red)


@dataclass
class PointReduction:
    point: list
    condition_A: list
    condition_B: bool
    blacker: bool
    level_dim: int
    orbit_dim: int
    reduced_dim: int
    reduced_ranks: list
    reduced_joint_kernel_dim: int


@dataclass
class ReductionReport:
    points: list
    condition_A: list  # per alpha, conjunction over points
    condition_B: bool
    blacker: bool
    consistent: bool  # blacker <=> reduced joint kernel 0 at every point

    def as_dict(self):
        return {"condition_A": self.condition_A, "condition_B": self.condition_B,
                "blacker": self.blacker, "consistent": self.consistent,
                "points": [vars(q) for q in self.points]}


def reduce_at(P, S, p, cfg: ToleranceConfig = DEFAULT) -> PointReduction:
    p = np.asarray(p, dtype=float)
    rr = reduced_structure_ranks(P, S, p, cfg)
    return PointReduction(p.tolist(), check_condition_A(P, S, p, cfg), check_condition_B(P, S, p, cfg),
                          check_blacker(P, S, p, cfg), rr.level_dim, rr.orbit_dim, rr.reduced_dim,
                          rr.ranks, rr.joint_kernel_dim)


def reduction_report(P, S, points, cfg: ToleranceConfig = DEFAULT) -> ReductionReport:
    pts = [reduce_at(P, S, p, cfg) for p in points]
    A = [all(q.condition_A[a] for q in pts) for a in range(P.k)]
    B = all(q.condition_B for q in pts)
    bl = all(q.blacker for q in pts)
    cons = all(q.blacker == (q.reduced_joint_kernel_dim == 0) for q in pts)
    return ReductionReport(pts, A, B, bl, cons)


@dataclass
class DynamicsReductionReport:
    invariance: float
    tangency: float
    commutation: float
    passed: bool

    def as_dict(self):
        return dict(vars(self))


def dynamics_reduction_check(P, S, h: KFunction, points, field=None,
                             tol: float = DYNAMICS_TOL) -> DynamicsReductionReport:
    """Defects of xi_i h^a = 0, dJ(X_h) = 0 and [xi_i, X_h] = 0 over ``points``.

    ``field`` may supply X_h directly (value/jacobian); otherwise it is solved for.
    Without ``h`` the invariance defect uses xi_i h^a = omega^a(X_h, xi_i).
    """
    if h is None and field is None:
        raise ValueError("need a Hamiltonian or a vector field")
    inv = tan = com = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        if field is None:
            X = hamiltonian_field_at(P, h, p).require(p)
            JX = hamiltonian_field_jacobian(P, h, p, X)
        else:
            X, JX = field.value(p), field.jacobian(p)
        Xi = S.generator_matrix(p, P.n)
        G = h.grads(p) if h is not None else np.array([A.T @ X for A in P.matrices(p)])
        inv = max(inv, float(np.max(np.abs(G @ Xi), initial=0.0)))
        dJ = momentum_differentials(P, S, p)
        tan = max(tan, float(np.max(np.abs(dJ @ X), initial=0.0)))
        for xi in S.generators:
            br = JX @ xi.value(p) - xi.jacobian(p) @ X
            com = max(com, float(np.max(np.abs(br), initial=0.0)))
    return DynamicsReductionReport(inv, tan, com, inv < tol and tan < tol and com < tol)
