"""Relative equilibria, second variations and formal stability."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import subspace as sub
from .geometry import HamiltonianVectorField, KFunction, PolySymplecticStructure
from .subspace import DEFAULT, Definiteness, ToleranceConfig
from .symmetry import (SymmetryModel, isotropy_algebra, isotropy_orbit, level_tangent,
                       momentum_differentials, momentum_hessians)

RESIDUAL_TOL = 1e-9
GAUGE_TOL = 1e-7
DEDUP_RADIUS = 1e-6


class NoConvergence(RuntimeError):
    pass


@dataclass
class RelativeEquilibrium:
    z: np.ndarray
    xi: np.ndarray
    mu: np.ndarray | None
    residual: float
    field_norm: float
    family_dim: int = 0
    xi_in_isotropy: bool = True
    iterations: int = 0

    @property
    def accepted(self) -> bool:
        return self.residual < RESIDUAL_TOL * (1.0 + self.field_norm)

    def as_dict(self):
        return {"z": self.z.tolist(), "xi": self.xi.tolist(),
                "mu": None if self.mu is None else np.asarray(self.mu).tolist(),
                "residual": self.residual, "accepted": self.accepted,
                "family_dim": self.family_dim, "xi_in_isotropy": self.xi_in_isotropy,
                "iterations": self.iterations}


def _field(P, h, vector_field):
    return vector_field if vector_field is not None else HamiltonianVectorField(P, h)


def _residual(X, S, z, xi):
    return X.value(z) - S.generator_matrix(z, len(z)) @ xi


def _jac(X, S, z, xi):
    J = X.jacobian(z)
    for c, g in zip(xi, S.generators):
        J = J - c * g.jacobian(z)
    return np.hstack([J, -S.generator_matrix(z, len(z))])


def _finish(P, S, X, z, xi, iters, cfg):
    r = float(np.linalg.norm(_residual(X, S, z, xi)))
    fn = float(np.linalg.norm(X.value(z)))
    fam = P.n + S.g - sub.rank(_jac(X, S, z, xi), cfg)
    iso = isotropy_algebra(P, S, z, "joint", cfg)
    off = xi - iso.B @ (iso.B.T @ xi) if S.g else xi
    in_iso = bool(np.linalg.norm(off) <= cfg.eq_tol * max(1.0, float(np.linalg.norm(xi))))
    return RelativeEquilibrium(z, xi, S.momentum_values(z), r, fn, fam, in_iso, iters)


def relative_equilibrium_at(P, S, h, z, vector_field=None, cfg: ToleranceConfig = DEFAULT):
    """Best multiplier at a given point (least squares); check ``.accepted``."""
    z = np.asarray(z, dtype=float)
    X = _field(P, h, vector_field)
    xi = np.linalg.lstsq(S.generator_matrix(z, P.n), X.value(z), rcond=None)[0] if S.g else np.zeros(0)
    return _finish(P, S, X, z, xi, 0, cfg)


def solve_from_seed(P, S, h, seed, xi0=None, vector_field=None, cfg: ToleranceConfig = DEFAULT,
                    maxit=100, lam=1e-3):
    """Levenberg-damped Gauss-Newton on F(z, xi) = X_h(z) - sum_i xi_i xi^i(z)."""
    X = _field(P, h, vector_field)
    z = np.asarray(seed, dtype=float).copy()
    n, g = P.n, S.g
    if xi0 is None:
        xi0 = np.linalg.lstsq(S.generator_matrix(z, n), X.value(z), rcond=None)[0] if g else np.zeros(0)
    w = np.concatenate([z, np.asarray(xi0, dtype=float)])
    F = _residual(X, S, w[:n], w[n:])
    f = float(np.linalg.norm(F))
    it = 0
    while it < maxit:
        if f <= 1e-13 * (1.0 + float(np.linalg.norm(X.value(w[:n])))):
            break
        it += 1
        J = _jac(X, S, w[:n], w[n:])
        A = J.T @ J
        step = np.linalg.solve(A + lam * np.eye(n + g), -J.T @ F)
        cand = w + step
        try:
            Fc = _residual(X, S, cand[:n], cand[n:])
            fc = float(np.linalg.norm(Fc))
        except (ArithmeticError, ValueError):
            fc = np.inf
        if fc < f:
            w, F, f = cand, Fc, fc
            lam *= 0.5
        else:
            lam *= 4.0
            if lam > 1e16:
                break
    eq = _finish(P, S, X, w[:n], w[n:], it, cfg)
    if not eq.accepted:
        raise NoConvergence(f"residual {eq.residual:.3g} after {it} iterations from seed {list(seed)}")
    return eq


@dataclass
class EquilibriumSearch:
    equilibria: list
    failures: list = field(default_factory=list)  # (seed, message)


def find_relative_equilibria(P, S, h, seeds, vector_field=None, cfg: ToleranceConfig = DEFAULT,
                             maxit=100, accept=None) -> EquilibriumSearch:
    found, failed = [], []
    for s in seeds:
        try:
            eq = solve_from_seed(P, S, h, s, vector_field=vector_field, cfg=cfg, maxit=maxit)
        except (NoConvergence, ArithmeticError, np.linalg.LinAlgError) as exc:
            failed.append((list(map(float, s)), str(exc)))
            continue
        if accept is not None and not accept(eq.z):
            failed.append((list(map(float, s)), "converged outside the domain"))
            continue
        if all(np.linalg.norm(eq.z - e.z) >= DEDUP_RADIUS for e in found):
            found.append(eq)
    return EquilibriumSearch(found, failed)


# ---------------------------------------------------------------------------
# h_xi and its variations

def h_xi_gradients(P, S, h: KFunction, z, xi) -> np.ndarray:
    """Rows grad h^a - sum_i xi_i dJ^a_i at z."""
    z = np.asarray(z, dtype=float)
    return h.grads(z) - np.einsum("i,ain->an", np.asarray(xi, float), momentum_differentials(P, S, z))


def h_xi_critical_check(P, S, h, z, xi, mu=None) -> np.ndarray:
    """Norm of grad h^a_xi for each a (mu only shifts h_xi by a constant)."""
    return np.linalg.norm(h_xi_gradients(P, S, h, z, xi), axis=1)


def h_xi_hessians(P, S, h, z, xi):
    z = np.asarray(z, dtype=float)
    HJ = momentum_hessians(P, S, z)
    return [H - np.einsum("i,imn->mn", np.asarray(xi, float), HJ[a]) for a, H in enumerate(h.hessians(z))]


def second_variation(P, S, h, eq: RelativeEquilibrium, alpha: int, cfg: ToleranceConfig = DEFAULT):
    """Hessian of h^alpha_xi at z_e restricted to the level tangent; returns (basis, matrix)."""
    L = level_tangent(P, S, eq.z, cfg)
    return L, sub.restrict_bilinear(h_xi_hessians(P, S, h, eq.z, eq.xi)[alpha], L)


@dataclass
class GaugeReport:
    isotropy_defect: float
    kernel_defect: float
    passed: bool

    def as_dict(self):
        return dict(vars(self))


def gauge_degeneracy_check(P, S, h, eq: RelativeEquilibrium, cfg: ToleranceConfig = DEFAULT,
                           tol: float = GAUGE_TOL) -> GaugeReport:
    z = eq.z
    L = level_tangent(P, S, z, cfg)
    Omu = isotropy_orbit(P, S, z, "joint", cfg)
    Hs = h_xi_hessians(P, S, h, z, eq.xi)
    iso = ker = 0.0
    for a, H in enumerate(Hs):
        if Omu.dim and L.dim:
            iso = max(iso, float(np.max(np.abs(Omu.B.T @ H @ L.B))))
        K = sub.intersect(P.kernel(a, z, cfg), L, cfg)
        if K.dim and L.dim:
            ker = max(ker, float(np.max(np.abs(K.B.T @ H @ L.B))))
    return GaugeReport(iso, ker, iso < tol and ker < tol)


def _scale(H):
    return float(np.max(np.abs(H), initial=0.0))


class Verdict(str, Enum):
    FormallyStable = "FormallyStable"
    FormallyStableNegative = "FormallyStableNegative"
    NotFormallyStable = "NotFormallyStable"
    Inconclusive = "Inconclusive"


@dataclass
class AlphaBlock:
    basis: np.ndarray  # n x m, the supplement S^alpha
    spectrum: list
    verdict: Definiteness
    complement_dim: int  # dim(T(G_mu z) + ker omega^alpha cap level)


@dataclass
class StabilityReport:
    z: np.ndarray
    xi: np.ndarray
    level_dim: int
    orbit_dim: int
    blocks: list
    spanning: bool
    classification: Verdict

    def as_dict(self):
        return {"z": self.z.tolist(), "xi": self.xi.tolist(), "level_dim": self.level_dim,
                "isotropy_orbit_dim": self.orbit_dim, "spanning": self.spanning,
                "classification": self.classification.value,
                "blocks": [{"supplement_dim": b.basis.shape[1], "supplement": b.basis.T.tolist(),
                            "spectrum": b.spectrum, "verdict": b.verdict.value,
                            "complement_dim": b.complement_dim} for b in self.blocks]}


def classify_formal_stability(P, S, h, eq: RelativeEquilibrium,
                              cfg: ToleranceConfig = DEFAULT) -> StabilityReport:
    z = eq.z
    L = level_tangent(P, S, z, cfg)
    Omu = isotropy_orbit(P, S, z, "joint", cfg)
    Hs = h_xi_hessians(P, S, h, z, eq.xi)
    blocks = []
    for a, H in enumerate(Hs):
        W = sub.sum_(Omu, sub.intersect(P.kernel(a, z, cfg), L, cfg), cfg)
        Sa = sub.orth_complement_within(W, L, cfg)
        R = sub.restrict_bilinear(H, Sa)
        spec = np.linalg.eigvalsh(R).tolist() if Sa.dim else []
        blocks.append(AlphaBlock(Sa.B, spec, sub.definiteness(R, cfg.eig_tol, _scale(H)), W.dim))
    total = sub.sum_all([sub.SubspaceBasis(P.n, b.basis) for b in blocks] + [Omu], P.n, cfg)
    spanning = sub.equals(total, L, cfg)
    active = [b.verdict for b in blocks if b.basis.shape[1] > 0]
    D = Definiteness
    if any(v in (D.Indefinite, D.Zero) for v in active):
        verdict = Verdict.NotFormallyStable
    elif spanning and all(v == D.PositiveDefinite for v in active):
        verdict = Verdict.FormallyStable
    elif spanning and all(v == D.NegativeDefinite for v in active):
        verdict = Verdict.FormallyStableNegative
    else:
        verdict = Verdict.Inconclusive
    return StabilityReport(z, np.asarray(eq.xi), L.dim, Omu.dim, blocks, spanning, verdict)


def reduced_minimum_check(P, S, h, eq: RelativeEquilibrium, cfg: ToleranceConfig = DEFAULT):
    """Definiteness of the summed second variations on a complement of T(G_mu z) in the level tangent."""
    z = eq.z
    L = level_tangent(P, S, z, cfg)
    Q = sub.orth_complement_within(isotropy_orbit(P, S, z, "joint", cfg), L, cfg)
    Hs = h_xi_hessians(P, S, h, z, eq.xi)
    R = sum(sub.restrict_bilinear(H, Q) for H in Hs)
    spec = np.linalg.eigvalsh(R).tolist() if Q.dim else []
    return sub.definiteness(R, cfg.eig_tol, max(_scale(H) for H in Hs)), spec


@dataclass
class EquivalenceCheck:
    residual: float
    gradient: float
    residual_zero: bool
    gradients_zero: bool

    @property
    def agree(self) -> bool:
        return self.residual_zero == self.gradients_zero


def theorem_equivalence(P, S, h, z, vector_field=None, tol=1e-8) -> EquivalenceCheck:
    """Compare min_xi |X_h - xi_P| with min_xi max_a |grad h^a_xi| at z."""
    z = np.asarray(z, dtype=float)
    X = _field(P, h, vector_field).value(z)
    Xi = S.generator_matrix(z, P.n)
    xi_r = np.linalg.lstsq(Xi, X, rcond=None)[0] if S.g else np.zeros(0)
    res = float(np.linalg.norm(X - Xi @ xi_r))
    dJ = momentum_differentials(P, S, z)  # (k, g, n)
    G = h.grads(z)
    M = np.transpose(dJ, (0, 2, 1)).reshape(-1, S.g)  # rows (a, n)
    xi_g = np.linalg.lstsq(M, G.ravel(), rcond=None)[0] if S.g else np.zeros(0)
    grad = float(np.max(np.linalg.norm(h_xi_gradients(P, S, h, z, xi_g), axis=1)))
    return EquivalenceCheck(res, grad, res < tol * (1.0 + float(np.linalg.norm(X))),
                            grad < tol * (1.0 + float(np.linalg.norm(G))))
